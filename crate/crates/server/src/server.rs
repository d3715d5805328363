//! WebSocket front end. Each connection owns one [`Session`] and its own tick
//! timer; the physics never waits on the client.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{IntoResponse, Json};
use axum::routing::get;
use axum::Router;
use blockdrop::games::list_games;
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::time::MissedTickBehavior;

use crate::protocol::ServerMessage;
use crate::session::Session;
use crate::store::RecordStore;

/// One control step per tick: 10 Hz.
pub const DEFAULT_TICK: Duration = Duration::from_millis(100);

#[derive(Clone)]
struct AppState {
    store: Arc<RecordStore>,
    tick: Duration,
    next_id: Arc<AtomicU64>,
}

/// Routes: `/ws` for play sessions, `/games` for the roster as JSON.
pub fn router(store: Arc<RecordStore>, tick: Duration) -> Router {
    let state = AppState { store, tick, next_id: Arc::new(AtomicU64::new(1)) };
    Router::new()
        .route("/", get(index))
        .route("/games", get(games))
        .route("/ws", get(upgrade))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, store: Arc<RecordStore>, tick: Duration) -> std::io::Result<()> {
    axum::serve(listener, router(store, tick)).await
}

async fn index() -> &'static str {
    "blockdrop session service: connect a play client to /ws\n"
}

async fn games() -> impl IntoResponse {
    let names: Vec<_> = list_games(None).into_iter().map(|g| g.name).collect();
    Json(names)
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| run_session(socket, state))
}

async fn run_session(socket: WebSocket, state: AppState) {
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let mut session = Session::new(id, state.store.clone());
    let (mut tx, mut rx) = socket.split();
    let mut ticker = tokio::time::interval(state.tick);
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
    loop {
        let replies = tokio::select! {
            // Messages that arrive before a tick fires apply at that tick.
            biased;
            incoming = rx.next() => match incoming {
                Some(Ok(Message::Text(text))) => session.handle_text(text.as_str()),
                Some(Ok(Message::Binary(bytes))) => match std::str::from_utf8(&bytes) {
                    Ok(text) => session.handle_text(text),
                    Err(_) => session.handle_text(""),
                },
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => continue,
            },
            _ = ticker.tick() => session.tick(),
        };
        if send_all(&mut tx, replies).await.is_err() {
            break;
        }
    }
}

async fn send_all<S>(tx: &mut S, msgs: Vec<ServerMessage>) -> Result<(), axum::Error>
where
    S: SinkExt<Message, Error = axum::Error> + Unpin,
{
    for m in msgs {
        let text = serde_json::to_string(&m).expect("server messages serialize");
        tx.send(Message::Text(text.into())).await?;
    }
    Ok(())
}

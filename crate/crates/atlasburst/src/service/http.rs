//! axum glue: every request goes through [`AtlasService::handle`].

use std::future::Future;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, Request, StatusCode};
use axum::response::Response as HttpResponse;
use axum::Router;
use tokio::net::TcpListener;

use super::{AtlasService, VERSION_HEADER};

async fn dispatch(State(service): State<Arc<AtlasService>>, request: Request<Body>) -> HttpResponse {
    let method = request.method().clone();
    let path = request.uri().path().to_string();
    let query = request.uri().query().unwrap_or("").to_string();
    let worker = Arc::clone(&service);
    let m = method.as_str().to_string();
    let response = tokio::task::spawn_blocking(move || worker.handle(&m, &path, &query))
        .await
        .expect("request handler panicked");
    let body = if method == Method::HEAD { Body::empty() } else { Body::from(response.body) };
    let mut out = HttpResponse::new(body);
    *out.status_mut() = StatusCode::from_u16(response.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    let headers = out.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static(response.content_type));
    headers.insert(VERSION_HEADER, HeaderValue::from(response.version));
    out
}

fn router(service: Arc<AtlasService>) -> Router {
    Router::new().fallback(dispatch).with_state(service)
}

/// Serves until `shutdown` resolves.
pub async fn serve_with_shutdown(
    service: Arc<AtlasService>,
    listener: TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service)).with_graceful_shutdown(shutdown).await
}

/// Serves until ctrl-c; SIGHUP reloads the snapshot.
pub async fn serve(service: Arc<AtlasService>, listener: TcpListener) -> std::io::Result<()> {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        let mut hangups = signal(SignalKind::hangup())?;
        let reloader = Arc::clone(&service);
        tokio::spawn(async move {
            while hangups.recv().await.is_some() {
                let svc = Arc::clone(&reloader);
                match tokio::task::spawn_blocking(move || svc.reload()).await {
                    Ok(Ok(version)) => eprintln!("reloaded snapshot, version {version}"),
                    Ok(Err(e)) => eprintln!("reload failed, keeping current snapshot: {e}"),
                    Err(e) => eprintln!("reload task failed: {e}"),
                }
            }
        });
    }
    serve_with_shutdown(service, listener, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

//! Minimal JSON-over-HTTP client shared by the remote embedding and classifier backends.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct JsonClient {
    agent: ureq::Agent,
    base_url: String,
}

impl JsonClient {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
        JsonClient { agent, base_url: base_url.trim_end_matches('/').to_string() }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    /// POSTs `body` to `{base_url}/{route}` and decodes the JSON reply.
    pub fn post<B: Serialize, R: DeserializeOwned>(&self, route: &str, body: &B) -> Result<R> {
        let url = format!("{}/{}", self.base_url, route.trim_start_matches('/'));
        let mut response = self.agent.post(&url).send_json(body).map_err(|e| transport(&url, e))?;
        response.body_mut().read_json().map_err(|e| transport(&url, e))
    }
}

fn transport(url: &str, err: ureq::Error) -> Error {
    use ureq::Error as E;
    let retryable = match &err {
        E::StatusCode(code) => *code >= 500 || *code == 429,
        E::Io(_) | E::Timeout(_) | E::ConnectionFailed | E::HostNotFound | E::BodyStalled => true,
        _ => false,
    };
    Error::Transport { message: format!("{url}: {err}"), retryable }
}

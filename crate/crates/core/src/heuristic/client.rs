use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use thiserror::Error;

use super::protocol::{EvalFailure, EvalRequest, EvalResponse, Frame, PROTOCOL_VERSION};
use crate::tsp::{check_permutation, InstanceJson, TspInstance};

/// Slack added on top of the per-instance limit before the client gives up
/// on a reply.
pub const REPLY_GRACE: Duration = Duration::from_secs(5);
const HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvaluatorError {
    #[error("evaluator unavailable: {0}")]
    Down(String),
    #[error("evaluator protocol error: {0}")]
    Protocol(String),
    #[error("evaluator speaks protocol version {got}, expected {expected}")]
    VersionMismatch { expected: u32, got: u32 },
}

/// How to launch the evaluator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluatorCommand {
    pub program: String,
    pub args: Vec<String>,
}

impl EvaluatorCommand {
    pub fn new(program: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { program: program.into(), args: args.into_iter().map(Into::into).collect() }
    }
}

/// Result of one evaluation request that the evaluator answered.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalOutcome {
    Lengths(Vec<f64>),
    Failed(EvalFailure),
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Process {
    fn spawn(cmd: &EvaluatorCommand) -> Result<Self, EvaluatorError> {
        let mut child = Command::new(&cmd.program)
            .args(&cmd.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| EvaluatorError::Down(format!("cannot launch `{}`: {e}", cmd.program)))?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) | Err(_) => break,
                    Ok(_) => {
                        if tx.send(line).is_err() {
                            break;
                        }
                    }
                }
            }
        });
        let mut p = Self { child, stdin, lines };
        p.send(&Frame::Hello { version: PROTOCOL_VERSION })?;
        match p.recv(HANDSHAKE_TIMEOUT)? {
            Some(Frame::Hello { version }) if version == PROTOCOL_VERSION => Ok(p),
            Some(Frame::Hello { version }) => {
                p.kill();
                Err(EvaluatorError::VersionMismatch { expected: PROTOCOL_VERSION, got: version })
            }
            Some(other) => {
                p.kill();
                Err(EvaluatorError::Protocol(format!("expected hello, got {other:?}")))
            }
            None => {
                p.kill();
                Err(EvaluatorError::Down("no handshake reply".into()))
            }
        }
    }

    fn send(&mut self, frame: &Frame) -> Result<(), EvaluatorError> {
        self.stdin
            .write_all(frame.to_line().as_bytes())
            .and_then(|()| self.stdin.flush())
            .map_err(|e| EvaluatorError::Down(format!("write failed: {e}")))
    }

    /// `Ok(None)` on timeout.
    fn recv(&mut self, timeout: Duration) -> Result<Option<Frame>, EvaluatorError> {
        match self.lines.recv_timeout(timeout) {
            Ok(line) => Frame::from_line(&line)
                .map(Some)
                .map_err(|e| EvaluatorError::Protocol(format!("malformed frame `{}`: {e}", line.trim_end()))),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(EvaluatorError::Down("evaluator exited".into())),
        }
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// One evaluator subprocess; requests are strictly serialized. The process
/// is restarted after a protocol fault, a crash or a missed deadline.
pub struct EvaluatorClient {
    cmd: EvaluatorCommand,
    process: Option<Process>,
    next_id: u64,
    restarts: usize,
    reply_grace: Duration,
}

impl EvaluatorClient {
    /// Launch and handshake.
    pub fn spawn(cmd: EvaluatorCommand) -> Result<Self, EvaluatorError> {
        let process = Process::spawn(&cmd)?;
        Ok(Self { cmd, process: Some(process), next_id: 1, restarts: 0, reply_grace: REPLY_GRACE })
    }

    pub fn with_reply_grace(mut self, grace: Duration) -> Self {
        self.reply_grace = grace;
        self
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }

    fn restart(&mut self) {
        if let Some(mut p) = self.process.take() {
            p.kill();
        }
        self.restarts += 1;
        match Process::spawn(&self.cmd) {
            Ok(p) => self.process = Some(p),
            Err(e) => log::warn!("evaluator restart failed: {e}"),
        }
    }

    /// Send the raw request and wait for the matching response frame.
    pub fn call(&mut self, request: &EvalRequest) -> Result<EvalResponse, EvaluatorError> {
        if self.process.is_none() {
            self.restart();
        }
        let Some(p) = self.process.as_mut() else {
            return Err(EvaluatorError::Down("evaluator is not running".into()));
        };
        let deadline = Duration::from_secs_f64(request.timeout_s.max(0.0)) * request.instances.len().max(1) as u32
            + self.reply_grace;
        let outcome = p.send(&Frame::EvalRequest(request.clone())).and_then(|()| p.recv(deadline));
        match outcome {
            Ok(Some(Frame::EvalResponse(resp))) if resp.id == request.id => Ok(resp),
            Ok(Some(Frame::EvalResponse(resp))) => {
                self.restart();
                Err(EvaluatorError::Protocol(format!("response id {} for request {}", resp.id, request.id)))
            }
            Ok(Some(other)) => {
                self.restart();
                Err(EvaluatorError::Protocol(format!("unexpected frame {other:?}")))
            }
            Ok(None) => {
                self.restart();
                Ok(EvalResponse {
                    id: request.id,
                    lengths: None,
                    tours: None,
                    error: Some(EvalFailure::new("timeout", format!("no reply within {deadline:?}"))),
                })
            }
            Err(e) => {
                self.restart();
                Err(e)
            }
        }
    }

    /// Evaluate `source` on `instances`, checking the reply's shape and any
    /// echoed tours.
    pub fn evaluate(
        &mut self,
        source: &str,
        instances: &[TspInstance],
        timeout_s: f64,
    ) -> Result<EvalOutcome, EvaluatorError> {
        let id = self.next_id;
        self.next_id += 1;
        let request = EvalRequest {
            id,
            source: source.to_string(),
            instances: instances.iter().map(InstanceJson::from).collect(),
            timeout_s,
        };
        let resp = self.call(&request)?;
        check_response(resp, instances)
    }
}

pub(crate) fn check_response(resp: EvalResponse, instances: &[TspInstance]) -> Result<EvalOutcome, EvaluatorError> {
    match (resp.lengths, resp.error) {
        (_, Some(failure)) => Ok(EvalOutcome::Failed(failure)),
        (Some(lengths), None) => {
            if lengths.len() != instances.len() {
                return Err(EvaluatorError::Protocol(format!(
                    "{} lengths for {} instances",
                    lengths.len(),
                    instances.len()
                )));
            }
            if let Some(l) = lengths.iter().find(|l| !l.is_finite() || **l < 0.0) {
                return Err(EvaluatorError::Protocol(format!("bad length {l}")));
            }
            if let Some(tours) = resp.tours {
                if tours.len() != instances.len() {
                    return Err(EvaluatorError::Protocol(format!(
                        "{} tours for {} instances",
                        tours.len(),
                        instances.len()
                    )));
                }
                for (tour, inst) in tours.iter().zip(instances) {
                    if let Err(e) = check_permutation(tour, inst.len()) {
                        return Ok(EvalOutcome::Failed(EvalFailure::new("invalid_tour", e.to_string())));
                    }
                }
            }
            Ok(EvalOutcome::Lengths(lengths))
        }
        (None, None) => Err(EvaluatorError::Protocol("response has neither lengths nor error".into())),
    }
}

impl Drop for EvaluatorClient {
    fn drop(&mut self) {
        if let Some(mut p) = self.process.take() {
            if p.send(&Frame::Shutdown).is_ok() {
                for _ in 0..20 {
                    if matches!(p.child.try_wait(), Ok(Some(_))) {
                        return;
                    }
                    thread::sleep(Duration::from_millis(10));
                }
            }
            p.kill();
        }
    }
}

/// A fixed set of evaluator subprocesses shared by concurrent callers.
pub struct EvaluatorPool {
    clients: Vec<Mutex<EvaluatorClient>>,
    next: AtomicUsize,
}

impl EvaluatorPool {
    pub fn spawn(cmd: &EvaluatorCommand, size: usize) -> Result<Self, EvaluatorError> {
        let clients = (0..size.max(1))
            .map(|_| EvaluatorClient::spawn(cmd.clone()).map(Mutex::new))
            .collect::<Result<_, _>>()?;
        Ok(Self { clients, next: AtomicUsize::new(0) })
    }

    pub fn from_clients(clients: Vec<EvaluatorClient>) -> Self {
        assert!(!clients.is_empty(), "a pool needs at least one client");
        Self { clients: clients.into_iter().map(Mutex::new).collect(), next: AtomicUsize::new(0) }
    }

    pub fn len(&self) -> usize {
        self.clients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clients.is_empty()
    }

    /// Run `f` on an idle client, or wait for one.
    pub fn with_client<T>(&self, f: impl FnOnce(&mut EvaluatorClient) -> T) -> T {
        let start = self.next.fetch_add(1, Ordering::Relaxed);
        let n = self.clients.len();
        for k in 0..n {
            if let Ok(mut c) = self.clients[(start + k) % n].try_lock() {
                return f(&mut c);
            }
        }
        let mut c = self.clients[start % n].lock().unwrap_or_else(|e| e.into_inner());
        f(&mut c)
    }

    pub fn evaluate(
        &self,
        source: &str,
        instances: &[TspInstance],
        timeout_s: f64,
    ) -> Result<EvalOutcome, EvaluatorError> {
        self.with_client(|c| c.evaluate(source, instances, timeout_s))
    }
}

//! Serving a node over a byte stream.
//!
//! A reader thread decodes inbound frames into a channel, a writer thread
//! drains encoded outbound frames. The node itself stays on the caller's
//! thread and only touches the channels between loop iterations.

use std::io::{self, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, TryRecvError};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use serde_json::json;

use super::frame::{encode, Frame, FrameDecoder, FrameError};
use super::topic::{Direction, Topic};
use crate::pipeline::{HostMessage, Node};

/// Frames handed to the writer but not yet written.
pub const WRITER_BACKLOG: usize = 64;
const READ_CHUNK: usize = 4096;

#[derive(Debug)]
enum Inbound {
    Frame(Frame),
    Error(FrameError),
    Closed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PumpStats {
    pub commands: usize,
    pub framing_errors: usize,
    pub sent: usize,
}

/// One connected client.
pub struct Session {
    inbound: Receiver<Inbound>,
    outbound: Option<Sender<Vec<u8>>>,
    in_flight: Arc<AtomicUsize>,
    writer: Option<thread::JoinHandle<()>>,
    reading: bool,
    writable: bool,
}

impl Session {
    pub fn spawn<R, W>(mut reader: R, mut writer: W) -> Self
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let (in_tx, in_rx) = mpsc::channel();
        thread::spawn(move || {
            let mut dec = FrameDecoder::new();
            let mut chunk = [0u8; READ_CHUNK];
            loop {
                let n = match reader.read(&mut chunk) {
                    Ok(0) => break,
                    Ok(n) => n,
                    Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                    Err(e) => {
                        debug!("read: {e}");
                        break;
                    }
                };
                dec.push(&chunk[..n]);
                while let Some(item) = dec.next_frame() {
                    let msg = item.map_or_else(Inbound::Error, Inbound::Frame);
                    if in_tx.send(msg).is_err() {
                        return;
                    }
                }
            }
            if let Some(e) = dec.finish() {
                let _ = in_tx.send(Inbound::Error(e));
            }
            let _ = in_tx.send(Inbound::Closed);
        });

        let (out_tx, out_rx) = mpsc::channel::<Vec<u8>>();
        let in_flight = Arc::new(AtomicUsize::new(0));
        let counter = in_flight.clone();
        let writer = thread::spawn(move || {
            for bytes in out_rx {
                let ok = writer.write_all(&bytes).and_then(|_| writer.flush());
                counter.fetch_sub(1, Ordering::SeqCst);
                if let Err(e) = ok {
                    debug!("write: {e}");
                    break;
                }
            }
        });
        Self { inbound: in_rx, outbound: Some(out_tx), in_flight, writer: Some(writer), reading: true, writable: true }
    }

    /// False once the client closed its side of the stream.
    pub fn is_open(&self) -> bool {
        self.reading && self.writable
    }

    fn send(&mut self, msg: &HostMessage) -> bool {
        let Some(tx) = &self.outbound else {
            return false;
        };
        let bytes = match encode(&msg.topic, &msg.payload) {
            Ok(b) => b,
            Err(e) => {
                warn!("dropping outbound {}: {e}", msg.topic);
                return true;
            }
        };
        self.in_flight.fetch_add(1, Ordering::SeqCst);
        if tx.send(bytes).is_err() {
            self.in_flight.fetch_sub(1, Ordering::SeqCst);
            self.writable = false;
            return false;
        }
        true
    }

    fn report(&mut self, e: &FrameError) {
        warn!("framing error: {e}");
        self.send(&HostMessage::new("node", "error", json!({"error": e.to_string()})));
    }

    /// Applies pending inbound commands, then forwards queued host messages
    /// while the writer keeps up. Messages left behind stay in the node's
    /// drop-oldest host queue.
    pub fn pump(&mut self, node: &mut Node) -> PumpStats {
        let mut stats = PumpStats::default();
        while self.reading {
            match self.inbound.try_recv() {
                Ok(Inbound::Frame(f)) => match Topic::parse(&f.topic) {
                    Ok(t) if t.direction == Direction::In => {
                        stats.commands += 1;
                        let _ = node.handle_user_command(&t.route(), &f.payload);
                    }
                    _ => {
                        stats.framing_errors += 1;
                        self.report(&FrameError::BadTopic(f.topic));
                    }
                },
                Ok(Inbound::Error(e)) => {
                    stats.framing_errors += 1;
                    self.report(&e);
                }
                Ok(Inbound::Closed) | Err(TryRecvError::Disconnected) => self.reading = false,
                Err(TryRecvError::Empty) => break,
            }
        }
        while self.writable && self.in_flight.load(Ordering::SeqCst) < WRITER_BACKLOG {
            let Some(msg) = node.pop_host() else {
                break;
            };
            if self.send(&msg) {
                stats.sent += 1;
            }
        }
        stats
    }

    /// Hands every queued host message to the writer.
    pub fn flush(&mut self, node: &mut Node) -> usize {
        let mut sent = 0;
        while self.writable {
            let Some(msg) = node.pop_host() else {
                break;
            };
            sent += self.send(&msg) as usize;
        }
        sent
    }

    /// Waits for queued output to be written.
    pub fn close(mut self) {
        self.outbound = None;
        if let Some(w) = self.writer.take() {
            let _ = w.join();
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ServeOptions {
    /// Virtual microseconds per wall microsecond; `None` runs flat out.
    pub speed: Option<f64>,
    /// Loop iterations between two session pumps.
    pub batch: usize,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self { speed: Some(1.0), batch: 100 }
    }
}

/// Runs the node against one session until the client disconnects.
pub fn serve<R, W>(node: &mut Node, reader: R, writer: W, opts: ServeOptions) -> PumpStats
where
    R: Read + Send + 'static,
    W: Write + Send + 'static,
{
    let mut session = Session::spawn(reader, writer);
    let mut total = PumpStats::default();
    let wall0 = Instant::now();
    let virt0 = node.now();
    while session.is_open() {
        let s = session.pump(node);
        total.commands += s.commands;
        total.framing_errors += s.framing_errors;
        total.sent += s.sent;
        for _ in 0..opts.batch.max(1) {
            if let Some(speed) = opts.speed {
                let target = virt0 + (wall0.elapsed().as_micros() as f64 * speed) as u64;
                if node.now() >= target {
                    thread::sleep(Duration::from_micros(500));
                    break;
                }
            }
            node.run_loop_iteration();
        }
    }
    let s = session.pump(node);
    total.commands += s.commands;
    total.framing_errors += s.framing_errors;
    total.sent += s.sent + session.flush(node);
    session.close();
    total
}

/// Accepts clients one after another; node state carries over between them.
pub fn serve_tcp(node: &mut Node, listener: TcpListener, opts: ServeOptions, max_sessions: Option<usize>) -> io::Result<()> {
    let mut served = 0;
    while max_sessions.is_none_or(|m| served < m) {
        let (stream, peer) = listener.accept()?;
        info!("client {peer} connected");
        stream.set_nodelay(true)?;
        let reader = stream.try_clone()?;
        let stats = serve(node, reader, stream, opts);
        info!("client {peer} left after {} commands", stats.commands);
        served += 1;
    }
    Ok(())
}

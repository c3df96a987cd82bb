//! The coordinator-model runtime. Players hold edge subsets and talk only to
//! the coordinator; every message is metered in bits.
//!
//! Bit accounting (with `L = ceil(log2 n)`): a vertex costs `L`, an edge `2L`,
//! an integer in `[0, B)` costs `ceil(log2 B)`. Vertex sets carry a length
//! prefix of `ceil(log2(n + 1))` bits, edge lists a prefix of
//! `ceil(log2(C(n,2) + 1))` bits. Framing is counted in `messages` only.

use std::any::Any;
use std::collections::HashSet;
use std::fmt;
use std::rc::Rc;

use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::generators::{rng_from_seed, EdgePartition};
use crate::graph::{ceil_log2, pair_count, Edge, Graph, Vertex};
use crate::protocols::{self, Audit};

/// A typed message. Its cost depends only on its shape and on `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Bit(bool),
    /// A bit vector whose length both sides already know (no prefix).
    Bits(Vec<bool>),
    Vertex(Vertex),
    Edge(Edge),
    Int {
        value: u64,
        bound: u64,
    },
    VertexSet(Vec<Vertex>),
    EdgeList(Vec<Edge>),
    /// One degree per vertex, each in `[0, n)`.
    Degrees(Vec<u32>),
    /// One optional cluster center per vertex.
    Assignment(Vec<Option<Vertex>>),
}

impl Payload {
    pub fn bits(&self, n: usize) -> u64 {
        let l = u64::from(ceil_log2(n.max(2) as u64));
        match self {
            Payload::Bit(_) => 1,
            Payload::Bits(b) => b.len() as u64,
            Payload::Vertex(_) => l,
            Payload::Edge(_) => 2 * l,
            Payload::Int { bound, .. } => u64::from(ceil_log2((*bound).max(1))),
            Payload::VertexSet(s) => set_prefix_bits(n) + s.len() as u64 * l,
            Payload::EdgeList(e) => edge_list_prefix_bits(n) + e.len() as u64 * 2 * l,
            Payload::Degrees(d) => d.len() as u64 * l,
            Payload::Assignment(a) => a.len() as u64 * u64::from(ceil_log2(n as u64 + 1)),
        }
    }

    pub fn as_vertex_set(&self) -> Option<&[Vertex]> {
        match self {
            Payload::VertexSet(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_edge_list(&self) -> Option<&[Edge]> {
        match self {
            Payload::EdgeList(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_bits(&self) -> Option<&[bool]> {
        match self {
            Payload::Bits(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_degrees(&self) -> Option<&[u32]> {
        match self {
            Payload::Degrees(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_assignment(&self) -> Option<&[Option<Vertex>]> {
        match self {
            Payload::Assignment(a) => Some(a),
            _ => None,
        }
    }
}

/// Length prefix of a vertex set.
pub fn set_prefix_bits(n: usize) -> u64 {
    u64::from(ceil_log2(n as u64 + 1))
}

/// Length prefix of an edge list.
pub fn edge_list_prefix_bits(n: usize) -> u64 {
    u64::from(ceil_log2(pair_count(n) + 1))
}

/// Measured communication of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub bits_to_coordinator: Vec<u64>,
    pub bits_from_coordinator: Vec<u64>,
    pub rounds: u64,
    pub messages: u64,
}

impl Transcript {
    fn new(s: usize) -> Self {
        Transcript {
            bits_to_coordinator: vec![0; s],
            bits_from_coordinator: vec![0; s],
            rounds: 0,
            messages: 0,
        }
    }

    pub fn bits_up(&self) -> u64 {
        self.bits_to_coordinator.iter().sum()
    }

    pub fn bits_down(&self) -> u64 {
        self.bits_from_coordinator.iter().sum()
    }

    pub fn total_bits(&self) -> u64 {
        self.bits_up() + self.bits_down()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Interactive,
    /// Every player sends exactly one message; the coordinator never replies.
    Simultaneous,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Up,
    Down,
}

struct Player {
    local: Graph,
    inbox: Vec<Rc<Payload>>,
    memory: Option<Box<dyn Any>>,
}

/// What a player can see while composing a message: its own edges, the
/// messages it has received, and its private scratch memory. Nothing else.
pub struct PlayerView<'a> {
    id: usize,
    s: usize,
    local: &'a Graph,
    inbox: &'a [Rc<Payload>],
    memory: &'a mut Option<Box<dyn Any>>,
}

impl PlayerView<'_> {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn n(&self) -> usize {
        self.local.n()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// The player's own edges `E_i` as a graph.
    pub fn local(&self) -> &Graph {
        self.local
    }

    pub fn inbox(&self) -> &[Rc<Payload>] {
        self.inbox
    }

    /// The most recent received message matching `pick`.
    pub fn latest<T>(&self, pick: impl Fn(&Payload) -> Option<&T>) -> Option<&T>
    where
        T: ?Sized,
    {
        self.inbox.iter().rev().find_map(|p| pick(p))
    }

    /// Private per-player state, created on first use.
    pub fn memory<T: Default + 'static>(&mut self) -> &mut T {
        self.parts().2
    }

    /// Own edges, inbox and scratch memory, borrowed together.
    pub fn parts<T: Default + 'static>(&mut self) -> (&Graph, &[Rc<Payload>], &mut T) {
        let slot = self.memory.get_or_insert_with(|| Box::new(T::default()));
        if !slot.is::<T>() {
            *slot = Box::new(T::default());
        }
        let mem = slot.downcast_mut::<T>().expect("type checked above");
        (self.local, self.inbox, mem)
    }
}

/// One run of the coordinator model. Protocol code drives the coordinator
/// directly and reaches players only through [`PlayerView`] callbacks.
pub struct ProtocolContext {
    n: usize,
    mode: Mode,
    players: Vec<Player>,
    transcript: Transcript,
    rng: ChaCha8Rng,
    free_randomness: bool,
    received: HashSet<Edge>,
    spoken: Vec<bool>,
    last_direction: Option<Direction>,
}

impl ProtocolContext {
    pub fn new(partition: &EdgePartition, seed: u64, mode: Mode, free_randomness: bool) -> Self {
        let s = partition.s();
        ProtocolContext {
            n: partition.n(),
            mode,
            players: (0..s)
                .map(|i| Player {
                    local: partition.local_graph(i),
                    inbox: Vec::new(),
                    memory: None,
                })
                .collect(),
            transcript: Transcript::new(s),
            rng: rng_from_seed(seed),
            free_randomness,
            received: HashSet::new(),
            spoken: vec![false; s],
            last_direction: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.players.len()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    /// The coordinator's private randomness.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Bits for one vertex id.
    pub fn vertex_bits(&self) -> u64 {
        u64::from(ceil_log2(self.n.max(2) as u64))
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.players.len() {
            return Err(domain(format!(
                "player {player} out of range for s = {}",
                self.players.len()
            )));
        }
        Ok(())
    }

    fn require_interactive(&self, what: &str) -> Result<()> {
        if self.mode == Mode::Simultaneous {
            return Err(Error::ProtocolViolation(format!(
                "{what} is not allowed in simultaneous mode"
            )));
        }
        Ok(())
    }

    fn note(&mut self, dir: Direction) {
        if dir == Direction::Up && self.last_direction != Some(Direction::Up) {
            self.transcript.rounds += 1;
        }
        self.last_direction = Some(dir);
    }

    fn record_received(&mut self, payload: &Payload) {
        match payload {
            Payload::Edge(e) => {
                self.received.insert(*e);
            }
            Payload::EdgeList(list) => self.received.extend(list.iter().copied()),
            _ => {}
        }
    }

    fn view(&mut self, player: usize) -> PlayerView<'_> {
        let s = self.players.len();
        let p = &mut self.players[player];
        PlayerView {
            id: player,
            s,
            local: &p.local,
            inbox: &p.inbox,
            memory: &mut p.memory,
        }
    }

    /// Lets `player` compose one message and delivers it to the coordinator.
    pub fn query_player<F>(&mut self, player: usize, compose: F) -> Result<Payload>
    where
        F: FnOnce(&mut PlayerView<'_>) -> Payload,
    {
        self.check_player(player)?;
        if self.mode == Mode::Simultaneous {
            if self.spoken[player] {
                return Err(Error::ProtocolViolation(format!(
                    "player {player} already sent its single simultaneous message"
                )));
            }
            self.spoken[player] = true;
        }
        let payload = compose(&mut self.view(player));
        self.transcript.bits_to_coordinator[player] += payload.bits(self.n);
        self.transcript.messages += 1;
        self.note(Direction::Up);
        self.record_received(&payload);
        Ok(payload)
    }

    /// Queries every player in id order.
    pub fn query_all<F>(&mut self, mut compose: F) -> Result<Vec<Payload>>
    where
        F: FnMut(&mut PlayerView<'_>) -> Payload,
    {
        (0..self.s()).map(|i| self.query_player(i, &mut compose)).collect()
    }

    /// Sends one message from the coordinator to one player.
    pub fn send_to_player(&mut self, player: usize, payload: Payload) -> Result<()> {
        self.require_interactive("sending to a player")?;
        self.check_player(player)?;
        self.transcript.bits_from_coordinator[player] += payload.bits(self.n);
        self.transcript.messages += 1;
        self.note(Direction::Down);
        self.players[player].inbox.push(Rc::new(payload));
        Ok(())
    }

    /// Sends the same message to every player, charged once per player.
    pub fn broadcast(&mut self, payload: Payload) -> Result<()> {
        self.require_interactive("broadcast")?;
        let bits = payload.bits(self.n);
        for b in &mut self.transcript.bits_from_coordinator {
            *b += bits;
        }
        self.transcript.messages += self.players.len() as u64;
        self.note(Direction::Down);
        let shared = Rc::new(payload);
        for p in &mut self.players {
            p.inbox.push(Rc::clone(&shared));
        }
        Ok(())
    }

    /// Broadcasts coordinator-drawn random choices. Free of charge when the
    /// run treats shared randomness as free.
    pub fn broadcast_shared_randomness(&mut self, payload: Payload) -> Result<()> {
        if !self.free_randomness {
            return self.broadcast(payload);
        }
        self.require_interactive("broadcast")?;
        let shared = Rc::new(payload);
        for p in &mut self.players {
            p.inbox.push(Rc::clone(&shared));
        }
        Ok(())
    }

    /// Forwards a message from `from` to `to` through the coordinator. Costs
    /// both legs plus `ceil(log2 s)` addressing bits on the upstream leg.
    pub fn relay<F>(&mut self, from: usize, to: usize, compose: F) -> Result<()>
    where
        F: FnOnce(&mut PlayerView<'_>) -> Payload,
    {
        self.require_interactive("relay")?;
        self.check_player(from)?;
        self.check_player(to)?;
        if from == to {
            return Err(domain(format!("relay from player {from} to itself")));
        }
        let payload = compose(&mut self.view(from));
        let bits = payload.bits(self.n);
        let addressing = u64::from(ceil_log2(self.players.len() as u64));
        self.transcript.bits_to_coordinator[from] += bits + addressing;
        self.transcript.bits_from_coordinator[to] += bits;
        self.transcript.messages += 2;
        self.note(Direction::Up);
        self.note(Direction::Down);
        self.record_received(&payload);
        self.players[to].inbox.push(Rc::new(payload));
        Ok(())
    }

    /// Drops all players' scratch memory, e.g. between BFS runs. Purely local.
    pub fn clear_player_memory(&mut self) {
        for p in &mut self.players {
            p.memory = None;
        }
    }

    /// Builds the output graph. Every output edge must have reached the
    /// coordinator in some message; anything else means information leaked.
    pub fn finish<I>(self, output: I) -> Result<(Graph, Transcript)>
    where
        I: IntoIterator<Item = Edge>,
    {
        let output: Vec<Edge> = output.into_iter().collect();
        if let Some(e) = output.iter().find(|e| !self.received.contains(e)) {
            return Err(Error::ProtocolViolation(format!(
                "output edge {e} never reached the coordinator"
            )));
        }
        if self.mode == Mode::Simultaneous {
            if let Some(i) = self.spoken.iter().position(|&b| !b) {
                return Err(Error::ProtocolViolation(format!(
                    "player {i} never sent its simultaneous message"
                )));
            }
        }
        let h = Graph::from_edge_iter_dedup(self.n, output)?;
        Ok((h, self.transcript))
    }
}

/// A named protocol with its parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    Additive2,
    AdditiveK { k: u32 },
    Greedy { k: u32 },
    BaswanaSen { k: u32 },
    Simultaneous { k: u32 },
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Additive2 => "additive2",
            Protocol::AdditiveK { .. } => "additive-k",
            Protocol::Greedy { .. } => "greedy",
            Protocol::BaswanaSen { .. } => "baswana-sen",
            Protocol::Simultaneous { .. } => "simultaneous",
        }
    }

    /// `k` for the parametrized protocols, the additive distortion 2 otherwise.
    pub fn param(&self) -> u32 {
        match *self {
            Protocol::Additive2 => 2,
            Protocol::AdditiveK { k }
            | Protocol::Greedy { k }
            | Protocol::BaswanaSen { k }
            | Protocol::Simultaneous { k } => k,
        }
    }

    /// The stretch the output promises.
    pub fn guarantee(&self) -> Stretch {
        match *self {
            Protocol::Additive2 => Stretch::Additive(2),
            Protocol::AdditiveK { k } => Stretch::Additive(k.max(2)),
            Protocol::Greedy { k } | Protocol::BaswanaSen { k } | Protocol::Simultaneous { k } => {
                Stretch::Multiplicative(2 * k - 1)
            }
        }
    }

    /// Parses a CLI protocol name, taking `k` where the protocol needs it.
    pub fn from_name(name: &str, k: u32) -> Result<Self> {
        Ok(match name {
            "additive2" => Protocol::Additive2,
            "additive-k" => Protocol::AdditiveK { k },
            "greedy" => Protocol::Greedy { k },
            "baswana-sen" => Protocol::BaswanaSen { k },
            "simultaneous" => Protocol::Simultaneous { k },
            other => return Err(domain(format!("unknown protocol `{other}`"))),
        })
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Distortion promised by a protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stretch {
    Additive(u32),
    Multiplicative(u32),
}

impl Stretch {
    pub fn verify(&self, g: &Graph, h: &Graph) -> Result<bool> {
        match *self {
            Stretch::Additive(beta) => crate::graph::verify_additive(g, h, beta),
            Stretch::Multiplicative(alpha) => crate::graph::verify_multiplicative(g, h, alpha),
        }
    }
}

/// Sampling constants shared by the randomized protocols. Every sample count
/// of the form `O~(f)` is `ceil(c * f * ln(n / delta))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolOptions {
    pub c_sample: f64,
    /// Constant for the `O~(k)` part of the full-BFS sample in additive-k.
    pub c_sample_k: f64,
    /// Failure target; `None` means `1/n`.
    pub delta: Option<f64>,
    pub free_randomness: bool,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            c_sample: 2.0,
            c_sample_k: 2.0,
            delta: None,
            free_randomness: false,
        }
    }
}

impl ProtocolOptions {
    /// `ln(n / delta)`, at least 1 so tiny graphs still sample.
    pub fn log_factor(&self, n: usize) -> f64 {
        let n = n.max(2) as f64;
        let delta = self.delta.unwrap_or(1.0 / n);
        (n / delta).ln().max(1.0)
    }

    /// `ceil(c * f * ln(n / delta))`, never below 1.
    pub fn sample_count(&self, c: f64, f: f64, n: usize) -> usize {
        ((c * f * self.log_factor(n)).ceil() as usize).max(1)
    }

    /// `min(1, c * ln(n / delta) / d)`.
    pub fn sample_probability(&self, d: f64, n: usize) -> f64 {
        (self.c_sample * self.log_factor(n) / d).min(1.0)
    }
}

/// Output of a protocol run.
#[derive(Clone, Debug)]
pub struct SpannerResult {
    pub spanner: Graph,
    pub transcript: Transcript,
    pub audit: Audit,
}

/// Runs `protocol` on `g` split by `partition`. Deterministic in all inputs.
pub fn run_protocol(
    protocol: Protocol,
    g: &Graph,
    partition: &EdgePartition,
    seed: u64,
    options: &ProtocolOptions,
) -> Result<SpannerResult> {
    partition.validate(g)?;
    let mode = match protocol {
        Protocol::Simultaneous { .. } => Mode::Simultaneous,
        _ => Mode::Interactive,
    };
    let mut ctx = ProtocolContext::new(partition, seed, mode, options.free_randomness);
    let (edges, audit) = match protocol {
        Protocol::Additive2 => protocols::additive2(&mut ctx, options)?,
        Protocol::AdditiveK { k } => protocols::additive_k(&mut ctx, k, options)?,
        Protocol::Greedy { k } => (protocols::greedy_mult(&mut ctx, k)?, Audit::None),
        Protocol::BaswanaSen { k } => protocols::baswana_sen(&mut ctx, k, options)?,
        Protocol::Simultaneous { k } => (protocols::simultaneous_mult(&mut ctx, k)?, Audit::None),
    };
    let (spanner, transcript) = ctx.finish(edges)?;
    Ok(SpannerResult {
        spanner,
        transcript,
        audit,
    })
}

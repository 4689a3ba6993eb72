//! The adversarial game against fixed-phase algorithms in the dynamic graph
//! model.
//!
//! Between phases the adversary may rebuild the graph as long as the
//! distance between the ALG and OPT files is preserved. The game tracks
//! that distance as a state: `S` (distance 0), `A(l)` (distance
//! `(2 alpha)^l`) and `F` (any other positive distance). Each play runs
//! one or more phases of the policy on a fresh graph and is scored by its
//! gain `C_ALG - (R0 - eps) C_OPT`.

use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::algorithms::{paper_constants, trajectory_cost, PaperConstants, PhaseRule};
use crate::error::{Error, Result};
use crate::instance::{bipartite_space, round_half_up, BipartiteLayout};
use crate::metric::{tolerance, MetricSpace, PointId};

/// `max{(2 alpha)^L / (1 - 2 alpha), 4 R0 / (k + 4)}`.
pub fn epsilon(levels: usize, k: usize) -> f64 {
    let p = paper_constants();
    let two_a = 2.0 * p.alpha;
    let first = two_a.powi(levels as i32) / (1.0 - two_a);
    let second = 4.0 * p.r0 / (k as f64 + 4.0);
    first.max(second)
}

/// `sum_{i < n} (2 alpha)^i`.
pub fn geometric_sum(n: usize) -> f64 {
    let two_a = 2.0 * paper_constants().alpha;
    (0..n).map(|i| two_a.powi(i as i32)).sum()
}

/// The bound on fixed-phase algorithms with phase factor `c`:
/// `inf_{a in (0,1)} max{a/(1-a), (c+2)/(c a) + 1, c(a+1) + 1}`.
pub fn l_of_c(c: f64) -> f64 {
    l_of_c_with(c, 20_000)
}

/// [`l_of_c`] with an explicit grid resolution before the local refinement.
pub fn l_of_c_with(c: f64, grid: usize) -> f64 {
    assert!(c > 0.0, "L(c) needs c > 0");
    let g = |a: f64| (a / (1.0 - a)).max((c + 2.0) / (c * a) + 1.0).max(c * (a + 1.0) + 1.0);
    golden_min(g, 0.0, 1.0, grid).1
}

/// Minimum of `L(c)` over `c`, as `(c, L(c))`.
pub fn min_l_of_c() -> (f64, f64) {
    golden_min(l_of_c, 0.0, 10.0, 2_000)
}

/// Grid search on the open interval `(lo, hi)` followed by golden-section
/// refinement in the bracket of the best grid point. `f` must be
/// unimodal near that point.
fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize) -> (f64, f64) {
    let h = (hi - lo) / grid as f64;
    let (best, _) = (1..grid)
        .map(|i| (i, f(lo + i as f64 * h)))
        .fold((1, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let (mut a, mut b) = (lo + (best - 1) as f64 * h, lo + (best + 1) as f64 * h);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a < 1e-13 {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Distance between the ALG and OPT files, as tracked by the game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GameState {
    /// Both files coincide.
    Start,
    /// Distance `(2 alpha)^l`.
    Level(usize),
    /// Any other positive distance.
    Far(f64),
}

impl GameState {
    pub fn dist(&self) -> f64 {
        match *self {
            GameState::Start => 0.0,
            GameState::Level(l) => (2.0 * paper_constants().alpha).powi(l as i32),
            GameState::Far(d) => d,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            GameState::Start => "S",
            GameState::Level(_) => "A",
            GameState::Far(_) => "F",
        }
    }
}

impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameState::Start => write!(f, "S"),
            GameState::Level(l) => write!(f, "A{l}"),
            GameState::Far(d) => write!(f, "F({d:.6})"),
        }
    }
}

impl Serialize for GameState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            tag: &'static str,
            #[serde(skip_serializing_if = "Option::is_none")]
            level: Option<usize>,
            dist: f64,
        }
        let level = match self {
            GameState::Level(l) => Some(*l),
            _ => None,
        };
        Repr { tag: self.tag(), level, dist: self.dist() }.serialize(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayKind {
    Linear,
    Bipartite,
    Finishing,
}

impl PlayKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlayKind::Linear => "linear",
            PlayKind::Bipartite => "bipartite",
            PlayKind::Finishing => "finishing",
        }
    }
}

/// What the policy did, in the terms of the bound covering the play.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayCase {
    LinearMoved,
    LinearStayed,
    Stayed,
    MovedToQ,
    MovedToS,
    Migrated,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlayOutcome {
    pub kind: PlayKind,
    pub case: PlayCase,
    pub state_in: GameState,
    pub next: GameState,
    pub c_alg: f64,
    pub c_opt: f64,
    /// `c_alg - factor * c_opt`.
    pub gain: f64,
    pub factor: f64,
    /// Guaranteed lower bound on `gain`.
    pub bound: f64,
    pub phases_used: usize,
    /// A finishing play started from `A(l)` with `l < L` because the
    /// self-loop cap was reached.
    pub forced: bool,
}

impl PlayOutcome {
    pub fn recomputed_gain(&self) -> f64 {
        self.c_alg - self.factor * self.c_opt
    }

    pub fn bound_met(&self, slack: f64) -> bool {
        self.gain >= self.bound - slack
    }
}

/// The concrete request sequence and both trajectories of a play.
#[derive(Clone, Debug)]
pub struct PlayTrace {
    pub space: MetricSpace,
    pub requests: Vec<PointId>,
    pub alg: Vec<PointId>,
    pub opt: Vec<PointId>,
}

impl PlayTrace {
    pub fn alg_cost(&self) -> f64 {
        trajectory_cost(&self.space, &self.requests, &self.alg)
    }

    pub fn opt_cost(&self) -> f64 {
        trajectory_cost(&self.space, &self.requests, &self.opt)
    }
}

/// What to do when the policy keeps looping at some `A(l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopCap {
    /// Leave the epoch open and stop the run.
    Stop,
    /// Play a finishing play from `A(l)`.
    Finish,
}

#[derive(Clone, Debug, Serialize)]
pub struct GameParams {
    /// Number of levels `L`.
    pub levels: usize,
    pub k: usize,
    pub c: f64,
    pub file_size: u64,
    pub seed: u64,
    /// Phases a finishing play may take before the policy is declared
    /// non-competitive.
    pub max_phases: usize,
    /// Consecutive self-loops at one level before [`LoopCap`] applies.
    pub max_loops: usize,
    pub loop_cap: LoopCap,
}

impl GameParams {
    pub fn new(levels: usize, k: usize, c: f64, file_size: u64) -> Self {
        GameParams { levels, k, c, file_size, seed: 0, max_phases: 32, max_loops: 16, loop_cap: LoopCap::Finish }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// One run of the game: fixed parameters plus the adversary's randomness.
pub struct Game {
    params: GameParams,
    consts: PaperConstants,
    eps: f64,
    phase_len: usize,
    linear_at_b: usize,
    bipartite_unit: MetricSpace,
    layout: BipartiteLayout,
    rng: ChaCha8Rng,
    notes: Vec<String>,
}

impl Game {
    pub fn new(params: GameParams) -> Result<Self> {
        let consts = paper_constants();
        if params.levels < 1 {
            return Err(Error::InvalidParameter("L must be at least 1".into()));
        }
        if params.k < 3 {
            return Err(Error::InvalidParameter(format!("k must be at least 3, got {}", params.k)));
        }
        if params.file_size < 1 {
            return Err(Error::InvalidParameter("D must be at least 1".into()));
        }
        if !(params.c.is_finite() && params.c > 0.0) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {}", params.c)));
        }
        let d = params.file_size as f64;
        let phase_len = round_half_up(params.c * d).max(1) as usize;
        let c_eff = phase_len as f64 / d;
        let mut notes = Vec::new();
        if (c_eff - params.c).abs() > 1e-12 {
            notes.push(format!("phase length round(c*D) = {phase_len}, effective c = {c_eff}"));
        }
        if c_eff <= consts.t_lin {
            return Err(Error::InvalidParameter(format!(
                "phase factor {c_eff} does not exceed t = {}; the linear play is undefined",
                consts.t_lin
            )));
        }
        if c_eff < consts.c_t {
            notes.push(format!("c = {c_eff} lies below c_T = {}; closed paths through F are not guaranteed", consts.c_t));
        }
        if phase_len < params.k {
            return Err(Error::InvalidParameter(format!(
                "phase of {phase_len} requests cannot cover the k = {} points of S",
                params.k
            )));
        }
        let eps = epsilon(params.levels, params.k);
        let linear_at_b = linear_split(&consts, eps, params.levels, phase_len, d, &mut notes);
        let bipartite_unit = bipartite_space(params.k, 1.0, consts.alpha, params.file_size)?;
        let rng = ChaCha8Rng::seed_from_u64(params.seed);
        Ok(Game {
            layout: BipartiteLayout { k: params.k },
            params,
            consts,
            eps,
            phase_len,
            linear_at_b,
            bipartite_unit,
            rng,
            notes,
        })
    }

    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    /// `R0 - eps`.
    pub fn factor(&self) -> f64 {
        self.consts.r0 - self.eps
    }

    pub fn phase_len(&self) -> usize {
        self.phase_len
    }

    /// `round(c D) / D`.
    pub fn c_eff(&self) -> f64 {
        self.phase_len as f64 / self.params.file_size as f64
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    fn big_d(&self) -> f64 {
        self.params.file_size as f64
    }

    fn outcome(&self, kind: PlayKind, case: PlayCase, state_in: GameState, next: GameState, trace: &PlayTrace) -> PlayOutcome {
        let c_alg = trace.alg_cost();
        let c_opt = trace.opt_cost();
        let factor = self.factor();
        PlayOutcome {
            kind,
            case,
            state_in,
            next,
            c_alg,
            c_opt,
            gain: c_alg - factor * c_opt,
            factor,
            bound: 0.0,
            phases_used: 1,
            forced: false,
        }
    }

    /// Two points at distance 1. The first `n - n_b` requests are at `a`,
    /// the last `n_b` at `b`. OPT stays at `a` if the policy moved to `b`
    /// and otherwise moves to `b` right after the last request at `a`.
    pub fn linear_play(&mut self, rule: &mut dyn PhaseRule, state: GameState) -> Result<(PlayOutcome, PlayTrace)> {
        if state != GameState::Start {
            return Err(Error::WrongState { state: state.to_string(), play: "linear" });
        }
        let n = self.phase_len;
        let at_b = self.linear_at_b;
        let space = MetricSpace::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            self.params.file_size,
        )?;
        let (a, b) = (PointId(0), PointId(1));
        let mut requests = vec![a; n - at_b];
        requests.extend(std::iter::repeat_n(b, at_b));
        let target = rule.decide(a, &requests, &space);
        space.point(target.0)?;
        let mut alg = vec![a; n];
        alg.push(target);
        let (case, opt) = if target == b {
            (PlayCase::LinearMoved, vec![a; n + 1])
        } else {
            let switch = (n - at_b).max(1);
            let mut opt = vec![a; switch];
            opt.resize(n + 1, b);
            (PlayCase::LinearStayed, opt)
        };
        let trace = PlayTrace { space, requests, alg, opt };
        let mut out = self.outcome(PlayKind::Linear, case, state, GameState::Level(0), &trace);
        out.bound = -geometric_sum(self.params.levels) * self.big_d();
        Ok((out, trace))
    }

    /// `a` joined to `q_1..q_k` at distance `f`, `q_i` joined to `s_j`
    /// (`i != j`) at distance `alpha f`. Requests go round robin over `S`
    /// in an order shuffled by the game's seed. Once the policy has moved,
    /// OPT is placed on the `q` that maximizes the final ALG-OPT distance
    /// and stays there for the whole phase.
    pub fn bipartite_play(&mut self, rule: &mut dyn PhaseRule, state: GameState) -> Result<(PlayOutcome, PlayTrace)> {
        let level = match state {
            GameState::Level(l) if l < self.params.levels => l,
            _ => return Err(Error::WrongState { state: state.to_string(), play: "bipartite" }),
        };
        let f = state.dist();
        let alpha = self.consts.alpha;
        let n = self.phase_len;
        let space = self.bipartite_unit.scaled(f);
        let layout = self.layout;
        let mut order = layout.s_points();
        order.shuffle(&mut self.rng);
        let requests: Vec<PointId> = order.iter().copied().cycle().take(n).collect();
        let a = layout.a();
        let target = rule.decide(a, &requests, &space);
        space.point(target.0)?;

        let mut counts = vec![0usize; layout.k + 1];
        for &r in &requests {
            counts[layout.s_index(r).expect("requests lie in S")] += 1;
        }
        // farthest from ALG; then the fewest requests at the one
        // non-adjacent s; then the lowest index
        let tol = 1e-9 * f;
        let mut opt_q = 1;
        for j in 2..=layout.k {
            let (dj, db) = (space.d(target, layout.q(j)), space.d(target, layout.q(opt_q)));
            if dj > db + tol || (dj > db - tol && counts[j] < counts[opt_q]) {
                opt_q = j;
            }
        }
        let q = layout.q(opt_q);
        let final_dist = space.d(target, q);
        let near = |x: f64| (final_dist - x).abs() <= tol;
        let (case, next, bound) = if near(f) {
            (PlayCase::Stayed, GameState::Level(level), 0.0)
        } else if near(2.0 * alpha * f) {
            (PlayCase::MovedToQ, GameState::Level(level + 1), f * self.big_d())
        } else if near(3.0 * alpha * f) {
            (PlayCase::MovedToS, GameState::Far(3.0 * alpha * f), (1.0 + alpha) * f * self.big_d())
        } else {
            return Err(Error::InvalidParameter(format!(
                "bipartite play ended at ALG-OPT distance {final_dist}, outside the covered cases"
            )));
        };
        let mut alg = vec![a; n];
        alg.push(target);
        let trace = PlayTrace { space, requests, alg, opt: vec![q; n + 1] };
        let mut out = self.outcome(PlayKind::Bipartite, case, state, next, &trace);
        out.bound = bound;
        Ok((out, trace))
    }

    /// Two points at distance `f`, all requests at OPT's point. Phases are
    /// repeated until the policy migrates there.
    pub fn finishing_play(&mut self, rule: &mut dyn PhaseRule, state: GameState) -> Result<(PlayOutcome, PlayTrace)> {
        let allowed = match state {
            GameState::Level(l) => l <= self.params.levels,
            GameState::Far(d) => d > 0.0,
            GameState::Start => false,
        };
        if !allowed {
            return Err(Error::WrongState { state: state.to_string(), play: "finishing" });
        }
        let forced = matches!(state, GameState::Level(l) if l < self.params.levels);
        let f = state.dist();
        let space =
            MetricSpace::new(vec!["alg".into(), "opt".into()], vec![vec![0.0, f], vec![f, 0.0]], self.params.file_size)?;
        let (a, b) = (PointId(0), PointId(1));
        let n = self.phase_len;
        let phase = vec![b; n];
        let mut requests = Vec::new();
        let mut alg = vec![a];
        for used in 1..=self.params.max_phases {
            let target = rule.decide(a, &phase, &space);
            space.point(target.0)?;
            requests.extend_from_slice(&phase);
            alg.extend(std::iter::repeat_n(a, n - 1));
            alg.push(target);
            if target == b {
                let opt = vec![b; requests.len() + 1];
                let trace = PlayTrace { space, requests, alg, opt };
                let mut out = self.outcome(PlayKind::Finishing, PlayCase::Migrated, state, GameState::Start, &trace);
                out.bound = (self.c_eff() + 1.0) * f * self.big_d();
                out.phases_used = used;
                out.forced = forced;
                return Ok((out, trace));
            }
        }
        Err(Error::NonCompetitive { phases: self.params.max_phases })
    }

    /// The play the adversary uses in `state`.
    pub fn play(&mut self, rule: &mut dyn PhaseRule, state: GameState) -> Result<(PlayOutcome, PlayTrace)> {
        match state {
            GameState::Start => self.linear_play(rule, state),
            GameState::Level(l) if l < self.params.levels => self.bipartite_play(rule, state),
            _ => self.finishing_play(rule, state),
        }
    }

    /// Drives the game from `S` until `num_epochs` epochs have returned to
    /// `S`, or the loop cap stops the run.
    pub fn run_epochs(&mut self, rule: &mut dyn PhaseRule, num_epochs: usize) -> Result<EpochLedger> {
        let mut epochs = Vec::new();
        let mut current = Vec::new();
        let mut state = GameState::Start;
        let mut loops = 0;
        let mut stopped = false;
        while epochs.len() < num_epochs {
            let (out, _) = if loops >= self.params.max_loops && matches!(state, GameState::Level(_)) {
                if self.params.loop_cap == LoopCap::Stop {
                    stopped = true;
                    break;
                }
                self.finishing_play(rule, state)?
            } else {
                self.play(rule, state)?
            };
            loops = if out.next == state { loops + 1 } else { 0 };
            state = out.next;
            current.push(out);
            if state == GameState::Start {
                epochs.push(EpochRecord::new(epochs.len(), std::mem::take(&mut current), true));
            }
        }
        if !current.is_empty() {
            epochs.push(EpochRecord::new(epochs.len(), current, false));
        }
        Ok(EpochLedger::new(self, rule.name(), epochs, stopped))
    }
}

/// Number of linear-play requests at `b`. The gain bound
/// `-sum_{i<L} (2 alpha)^i D` holds exactly when this count lies in
/// `[(R0 - eps - S_L) D, (1 + S_L) D / (R0 - 1 - eps)]`, an interval that
/// contains `t D`.
fn linear_split(p: &PaperConstants, eps: f64, levels: usize, n: usize, d: f64, notes: &mut Vec<String>) -> usize {
    let s = geometric_sum(levels);
    let lo = (p.r0 - eps - s) * d;
    let hi = (1.0 + s) * d / (p.r0 - 1.0 - eps);
    let mut at_b = (p.t_lin * d).ceil();
    if at_b > hi {
        at_b = hi.floor();
    }
    if at_b < lo {
        at_b = (p.t_lin * d).round();
        notes.push(format!("no integral linear split in [{lo}, {hi}]; using {at_b}"));
    }
    (at_b.max(0.0) as usize).min(n)
}

#[derive(Clone, Debug, Serialize)]
pub struct EpochRecord {
    pub index: usize,
    /// Whether the epoch returned to `S`.
    pub closed: bool,
    pub plays: Vec<PlayOutcome>,
    pub c_alg: f64,
    pub c_opt: f64,
    pub gain: f64,
}

impl EpochRecord {
    fn new(index: usize, plays: Vec<PlayOutcome>, closed: bool) -> Self {
        EpochRecord {
            index,
            closed,
            c_alg: plays.iter().map(|p| p.c_alg).sum(),
            c_opt: plays.iter().map(|p| p.c_opt).sum(),
            gain: plays.iter().map(|p| p.gain).sum(),
            plays,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EpochLedger {
    pub policy: String,
    pub params: GameParams,
    pub phase_len: usize,
    pub c_eff: f64,
    pub epsilon: f64,
    pub factor: f64,
    pub notes: Vec<String>,
    pub epochs: Vec<EpochRecord>,
    pub c_alg: f64,
    pub c_opt: f64,
    /// `c_alg / c_opt`.
    pub ratio: f64,
    /// OPT cost of the non-loop plays of an epoch left open; the additive
    /// constant when the policy loops forever at some level.
    pub gamma: f64,
    /// The loop cap stopped the run.
    pub stopped: bool,
    pub bounds_met: bool,
    pub transitions_valid: bool,
    /// Smallest total gain of a closed epoch, in units of `D`.
    pub min_closed_gain: Option<f64>,
}

impl EpochLedger {
    fn new(game: &Game, policy: String, epochs: Vec<EpochRecord>, stopped: bool) -> Self {
        let d = game.big_d();
        let slack = tolerance() * d;
        let plays = || epochs.iter().flat_map(|e| &e.plays);
        let c_alg: f64 = epochs.iter().map(|e| e.c_alg).sum();
        let c_opt: f64 = epochs.iter().map(|e| e.c_opt).sum();
        let gamma = epochs
            .iter()
            .filter(|e| !e.closed)
            .flat_map(|e| &e.plays)
            .filter(|p| p.next != p.state_in)
            .map(|p| p.c_opt)
            .sum::<f64>()
            + 0.0; // an empty f64 sum is -0.0
        let min_closed_gain = epochs.iter().filter(|e| e.closed).map(|e| e.gain / d).reduce(f64::min);
        EpochLedger {
            policy,
            params: game.params.clone(),
            phase_len: game.phase_len,
            c_eff: game.c_eff(),
            epsilon: game.eps,
            factor: game.factor(),
            notes: game.notes.clone(),
            bounds_met: plays().all(|p| p.bound_met(slack)),
            transitions_valid: epochs.iter().all(|e| path_is_valid(&e.plays, game.params.levels)),
            epochs,
            c_alg,
            c_opt,
            ratio: if c_opt > 0.0 { c_alg / c_opt } else { f64::INFINITY },
            gamma,
            stopped,
            min_closed_gain,
        }
    }

    pub fn plays(&self) -> impl Iterator<Item = &PlayOutcome> {
        self.epochs.iter().flat_map(|e| &e.plays)
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// One row per play.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["epoch", "kind", "case", "state_in", "state_out", "c_alg", "c_opt", "gain", "bound", "phases"])?;
        for e in &self.epochs {
            for p in &e.plays {
                out.write_record([
                    e.index.to_string(),
                    p.kind.as_str().to_string(),
                    serde_json::to_value(p.case)?.as_str().unwrap_or_default().to_string(),
                    p.state_in.to_string(),
                    p.next.to_string(),
                    p.c_alg.to_string(),
                    p.c_opt.to_string(),
                    p.gain.to_string(),
                    p.bound.to_string(),
                    p.phases_used.to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Whether a single transition is an edge of the state graph. A forced
/// finishing play may leave any `A(l)`.
pub fn transition_is_valid(play: &PlayOutcome, levels: usize) -> bool {
    use GameState::*;
    match (play.kind, play.state_in, play.next) {
        (PlayKind::Linear, Start, Level(0)) => true,
        (PlayKind::Bipartite, Level(l), Level(m)) => l < levels && (m == l || m == l + 1),
        (PlayKind::Bipartite, Level(l), Far(_)) => l < levels,
        (PlayKind::Finishing, Level(l), Start) => l == levels || play.forced,
        (PlayKind::Finishing, Far(_), Start) => true,
        _ => false,
    }
}

fn path_is_valid(plays: &[PlayOutcome], levels: usize) -> bool {
    let chained = plays.first().is_none_or(|p| p.state_in == GameState::Start)
        && plays.windows(2).all(|w| w[0].next == w[1].state_in);
    chained && plays.iter().all(|p| transition_is_valid(p, levels))
}

/// Closed-form gains of the closed paths through the state graph, in
/// units of `D`.
#[derive(Clone, Debug, Serialize)]
pub struct StateGraphReport {
    pub levels: usize,
    pub c: f64,
    /// `-sum_{i<L} (2a)^i + sum_{l<L} (2a)^l`.
    pub case1_telescoped: f64,
    /// `case1_telescoped` plus the finishing gain `(c+1)(2a)^L`.
    pub case1: f64,
    /// Path gain through `F` after leaving level `m`, for `m = 0..L`.
    pub case2: Vec<f64>,
    pub case2_min: f64,
    /// `(1+a) + (c+1) 3a - 1/(1-2a)` at `c`.
    pub case2_factor: f64,
    /// The same expression at `c_T`.
    pub case2_factor_at_ct: f64,
    pub all_nonnegative: bool,
}

pub fn verify_state_graph(levels: usize, c: f64) -> StateGraphReport {
    let p = paper_constants();
    let a = p.alpha;
    let two_a = 2.0 * a;
    let s_l = geometric_sum(levels);
    let climb = |m: usize| (0..m).map(|l| two_a.powi(l as i32)).sum::<f64>();
    let case1_telescoped = -s_l + climb(levels);
    let case1 = case1_telescoped + (c + 1.0) * two_a.powi(levels as i32);
    let case2: Vec<f64> = (0..levels)
        .map(|m| {
            let f = two_a.powi(m as i32);
            -s_l + climb(m) + (1.0 + a) * f + (c + 1.0) * 3.0 * a * f
        })
        .collect();
    let case2_min = case2.iter().copied().fold(f64::INFINITY, f64::min);
    let factor = |c: f64| (1.0 + a) + (c + 1.0) * 3.0 * a - 1.0 / (1.0 - two_a);
    let tol = tolerance();
    StateGraphReport {
        levels,
        c,
        case1_telescoped,
        case1,
        case2_min,
        case2_factor: factor(c),
        case2_factor_at_ct: factor(p.c_t),
        all_nonnegative: case1_telescoped >= -tol && case1 >= -tol && case2_min >= -tol,
        case2,
    }
}

/// Uniformly random targets, staying put with probability `stay`.
#[derive(Clone, Debug)]
pub struct RandomRule {
    rng: ChaCha8Rng,
    stay: f64,
}

impl RandomRule {
    pub fn new(seed: u64, stay: f64) -> Self {
        RandomRule { rng: ChaCha8Rng::seed_from_u64(seed), stay: stay.clamp(0.0, 1.0) }
    }
}

impl PhaseRule for RandomRule {
    fn name(&self) -> String {
        "random".into()
    }

    fn decide(&mut self, pos: PointId, _: &[PointId], space: &MetricSpace) -> PointId {
        if self.rng.gen_bool(self.stay) {
            pos
        } else {
            PointId(self.rng.gen_range(0..space.len()))
        }
    }
}

//! Exact maximum clique and fixed-size clique enumeration.
//!
//! Branch and bound over bitset candidate sets with greedy colouring bounds,
//! in the style of BBMC. Vertices are renumbered by descending degree (ties
//! by index) before the search. Work is split into subproblems two levels
//! deep and handed to worker threads through a shared generator; the only
//! shared mutable search state is the monotone best size.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::bitset::{AdjacencyMatrix, Bitset};

/// Vertices from which every searched clique must start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarterSet {
    reps: Vec<usize>,
    /// For orbit starters: `rank[v]` is the position in `reps` of the
    /// representative of v's orbit.
    rank: Option<Vec<usize>>,
}

impl StarterSet {
    /// Cliques through `reps[i]` avoid `reps[..i]`.
    pub fn plain(reps: Vec<usize>) -> Self {
        Self { reps, rank: None }
    }

    /// Orbit representatives, with `orbit_of[v]` indexing into `reps`. Cliques
    /// through `reps[i]` avoid every orbit before i, which is sound when the
    /// orbits come from a group of automorphisms.
    pub fn orbits(reps: Vec<usize>, orbit_of: Vec<usize>) -> Self {
        Self {
            reps,
            rank: Some(orbit_of),
        }
    }

    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    fn excluded_before(&self, i: usize, n: usize) -> Bitset {
        match &self.rank {
            Some(rank) => Bitset::from_indices(n, (0..n).filter(|&v| rank[v] < i)),
            None => Bitset::from_indices(n, self.reps[..i].iter().copied()),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchConfig {
    /// Look for a clique of at least this size and stop once one is found.
    pub target_size: Option<usize>,
    pub starters: Option<StarterSet>,
    /// Only cliques strictly larger than this are searched for.
    pub initial_lower_bound: usize,
    /// A proven bound on ω; the search stops as soon as it is attained.
    pub upper_bound: Option<usize>,
    pub time_budget: Option<Duration>,
    /// 0 means one thread per available core.
    pub threads: usize,
}

impl SearchConfig {
    fn thread_count(&self) -> usize {
        if self.threads > 0 {
            self.threads
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    /// A clique of the graph, sorted.
    pub witness: Vec<usize>,
    /// The clique number, when proven.
    pub omega: Option<usize>,
    /// A proven upper bound on ω, if any.
    pub upper_bound: Option<usize>,
    /// False only when the time budget ran out.
    pub completed: bool,
    pub nodes: u64,
    pub wall_time: Duration,
}

impl SearchResult {
    pub fn lower_bound(&self) -> usize {
        self.witness.len()
    }
}

/// Number of greedy colour classes on `candidates`, taking vertices in index
/// order. Bounds the clique number of the induced subgraph.
pub fn greedy_color_bound(adj: &AdjacencyMatrix, candidates: &Bitset) -> usize {
    let mut uncolored = candidates.words().to_vec();
    let mut colors = 0;
    while uncolored.iter().any(|&w| w != 0) {
        colors += 1;
        let mut avail = uncolored.clone();
        while let Some(v) = first_bit(&avail) {
            clear(&mut uncolored, v);
            clear(&mut avail, v);
            for (a, r) in avail.iter_mut().zip(adj.row(v)) {
                *a &= !r;
            }
        }
    }
    colors
}

#[inline]
fn first_bit(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .position(|&w| w != 0)
        .map(|i| i * 64 + words[i].trailing_zeros() as usize)
}

#[inline]
fn first_bit_from(words: &[u64], start_word: usize) -> Option<usize> {
    words[start_word..]
        .iter()
        .position(|&w| w != 0)
        .map(|i| (i + start_word) * 64 + words[i + start_word].trailing_zeros() as usize)
}

#[inline]
fn clear(words: &mut [u64], v: usize) {
    words[v / 64] &= !(1u64 << (v % 64));
}

/// Descending degree, ties by index.
fn degree_order(adj: &AdjacencyMatrix) -> Vec<usize> {
    let deg = adj.degrees();
    let mut order: Vec<usize> = (0..adj.n()).collect();
    order.sort_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));
    order
}

/// Greedy colouring of `p`: returns vertices with colour at least `kmin`, in
/// nondecreasing colour order, with their colours.
fn color_sort(
    adj: &AdjacencyMatrix,
    p: &[u64],
    kmin: usize,
    verts: &mut Vec<u32>,
    colors: &mut Vec<u32>,
    scratch_u: &mut Vec<u64>,
    scratch_q: &mut Vec<u64>,
) {
    verts.clear();
    colors.clear();
    scratch_u.clear();
    scratch_u.extend_from_slice(p);
    let mut k = 0usize;
    let mut lo = 0usize;
    loop {
        while lo < scratch_u.len() && scratch_u[lo] == 0 {
            lo += 1;
        }
        if lo == scratch_u.len() {
            break;
        }
        k += 1;
        scratch_q.clear();
        scratch_q.extend_from_slice(scratch_u);
        let mut from = lo;
        while let Some(v) = first_bit_from(scratch_q, from) {
            from = v / 64;
            clear(scratch_u, v);
            clear(scratch_q, v);
            let row = adj.row(v);
            for i in from..scratch_q.len() {
                scratch_q[i] &= !row[i];
            }
            if k >= kmin {
                verts.push(v as u32);
                colors.push(k as u32);
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Maximum,
    /// All cliques of exactly this size.
    Enumerate(usize),
}

struct Shared {
    mode: Mode,
    best: AtomicUsize,
    stop_at: usize,
    stop: AtomicBool,
    timed_out: AtomicBool,
    deadline: Option<Instant>,
    nodes: AtomicU64,
    witness: Mutex<Vec<usize>>,
    found: Mutex<Vec<Vec<usize>>>,
}

impl Shared {
    /// Size a clique must reach to be interesting.
    #[inline]
    fn goal(&self) -> usize {
        match self.mode {
            Mode::Maximum => self.best.load(Ordering::Relaxed) + 1,
            Mode::Enumerate(k) => k,
        }
    }

    fn offer(&self, clique: &[usize]) {
        match self.mode {
            Mode::Maximum => {
                if clique.len() <= self.best.load(Ordering::Relaxed) {
                    return;
                }
                let mut w = self.witness.lock().unwrap();
                if clique.len() > w.len().max(self.best.load(Ordering::Relaxed)) {
                    *w = clique.to_vec();
                    self.best.fetch_max(clique.len(), Ordering::SeqCst);
                    if clique.len() >= self.stop_at {
                        self.stop.store(true, Ordering::SeqCst);
                    }
                }
            }
            Mode::Enumerate(k) => {
                if clique.len() == k {
                    self.found.lock().unwrap().push(clique.to_vec());
                }
            }
        }
    }
}

struct Task {
    clique: Vec<usize>,
    p: Vec<u64>,
}

struct Level1 {
    clique: Vec<usize>,
    p: Vec<u64>,
    verts: Vec<u32>,
    colors: Vec<u32>,
}

/// Lazily produces two-level subproblems in the sequential branching order.
struct TaskGen<'a> {
    adj: &'a AdjacencyMatrix,
    shared: &'a Shared,
    roots: RootSource,
    current: Option<Level1>,
}

enum RootSource {
    Starters {
        list: Vec<(usize, Vec<u64>)>,
        next: usize,
    },
    Colored {
        verts: Vec<u32>,
        colors: Vec<u32>,
        p: Vec<u64>,
    },
}

impl<'a> TaskGen<'a> {
    fn next_level1(&mut self) -> Option<(Vec<usize>, Vec<u64>)> {
        let adj = self.adj;
        match &mut self.roots {
            RootSource::Starters { list, next } => {
                let (s, excl) = list.get(*next)?;
                *next += 1;
                let p = adj.row(*s).iter().zip(excl).map(|(r, e)| r & !e).collect();
                Some((vec![*s], p))
            }
            RootSource::Colored { verts, colors, p } => {
                let v = verts.pop()? as usize;
                let c = colors.pop().unwrap() as usize;
                if c < self.shared.goal() {
                    verts.clear();
                    return None;
                }
                clear(p, v);
                let mut sub: Vec<u64> = p.clone();
                for (a, r) in sub.iter_mut().zip(adj.row(v)) {
                    *a &= r;
                }
                Some((vec![v], sub))
            }
        }
    }

    fn next(&mut self) -> Option<Task> {
        loop {
            if self.shared.stop.load(Ordering::Relaxed) {
                return None;
            }
            if let Some(l1) = &mut self.current {
                let goal = self.shared.goal();
                match (l1.verts.pop(), l1.colors.pop()) {
                    (Some(w), Some(c)) if l1.clique.len() + c as usize >= goal => {
                        let w = w as usize;
                        clear(&mut l1.p, w);
                        let mut sub = l1.p.clone();
                        for (a, r) in sub.iter_mut().zip(self.adj.row(w)) {
                            *a &= r;
                        }
                        let mut clique = l1.clique.clone();
                        clique.push(w);
                        return Some(Task { clique, p: sub });
                    }
                    _ => self.current = None,
                }
                continue;
            }
            let (clique, p) = self.next_level1()?;
            let goal = self.shared.goal();
            if clique.len() >= goal || p.iter().all(|&w| w == 0) {
                return Some(Task { clique, p });
            }
            let (mut verts, mut colors) = (Vec::new(), Vec::new());
            let (mut su, mut sq) = (Vec::new(), Vec::new());
            let kmin = goal.saturating_sub(clique.len()).max(1);
            color_sort(
                self.adj,
                &p,
                kmin,
                &mut verts,
                &mut colors,
                &mut su,
                &mut sq,
            );
            self.current = Some(Level1 {
                clique,
                p,
                verts,
                colors,
            });
        }
    }
}

struct Frame {
    p: Vec<u64>,
    verts: Vec<u32>,
    colors: Vec<u32>,
}

struct Worker<'a> {
    adj: &'a AdjacencyMatrix,
    shared: &'a Shared,
    clique: Vec<usize>,
    frames: Vec<Frame>,
    su: Vec<u64>,
    sq: Vec<u64>,
    nodes: u64,
}

impl<'a> Worker<'a> {
    fn new(adj: &'a AdjacencyMatrix, shared: &'a Shared) -> Self {
        Self {
            adj,
            shared,
            clique: Vec::new(),
            frames: Vec::new(),
            su: Vec::new(),
            sq: Vec::new(),
            nodes: 0,
        }
    }

    fn run(&mut self, task: Task) {
        self.clique.clear();
        self.clique.extend_from_slice(&task.clique);
        self.shared.offer(&self.clique);
        if self.clique.len() >= self.shared.goal() && matches!(self.shared.mode, Mode::Enumerate(_))
        {
            return;
        }
        if task.p.iter().any(|&w| w != 0) {
            self.expand(0, &task.p);
        }
    }

    fn check_clock(&self) {
        if let Some(d) = self.shared.deadline {
            if Instant::now() >= d {
                self.shared.timed_out.store(true, Ordering::SeqCst);
                self.shared.stop.store(true, Ordering::SeqCst);
            }
        }
    }

    fn expand(&mut self, depth: usize, p_in: &[u64]) {
        self.nodes += 1;
        if self.nodes & 0x3ff == 0 {
            self.check_clock();
        }
        if self.shared.stop.load(Ordering::Relaxed) {
            return;
        }
        if self.frames.len() <= depth {
            self.frames.push(Frame {
                p: Vec::new(),
                verts: Vec::new(),
                colors: Vec::new(),
            });
        }
        let mut frame = std::mem::replace(
            &mut self.frames[depth],
            Frame {
                p: Vec::new(),
                verts: Vec::new(),
                colors: Vec::new(),
            },
        );
        frame.p.clear();
        frame.p.extend_from_slice(p_in);
        let kmin = self.shared.goal().saturating_sub(self.clique.len()).max(1);
        color_sort(
            self.adj,
            &frame.p,
            kmin,
            &mut frame.verts,
            &mut frame.colors,
            &mut self.su,
            &mut self.sq,
        );
        let mut sub: Vec<u64> = vec![0; frame.p.len()];
        for i in (0..frame.verts.len()).rev() {
            if self.clique.len() + (frame.colors[i] as usize) < self.shared.goal()
                || self.shared.stop.load(Ordering::Relaxed)
            {
                break;
            }
            let v = frame.verts[i] as usize;
            self.clique.push(v);
            let enumerate_hit =
                matches!(self.shared.mode, Mode::Enumerate(k) if self.clique.len() == k);
            if enumerate_hit {
                self.shared.offer(&self.clique);
            } else {
                let row = self.adj.row(v);
                let mut any = false;
                for ((s, a), r) in sub.iter_mut().zip(&frame.p).zip(row) {
                    *s = a & r;
                    any |= *s != 0;
                }
                if self.clique.len() > self.shared.best.load(Ordering::Relaxed)
                    && self.shared.mode == Mode::Maximum
                {
                    self.shared.offer(&self.clique);
                }
                if any {
                    self.expand(depth + 1, &sub);
                }
            }
            self.clique.pop();
            clear(&mut frame.p, v);
        }
        self.frames[depth] = frame;
    }
}

/// A relabelled copy of the graph in search order.
struct Prepared {
    order: Vec<usize>,
    pos: Vec<usize>,
    adj: AdjacencyMatrix,
}

impl Prepared {
    fn new(adj: &AdjacencyMatrix) -> Self {
        let order = degree_order(adj);
        let mut pos = vec![0; adj.n()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        Self {
            adj: adj.permuted(&order),
            order,
            pos,
        }
    }

    fn back(&self, vs: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = vs.iter().map(|&v| self.order[v]).collect();
        out.sort_unstable();
        out
    }
}

fn roots(prep: &Prepared, starters: Option<&StarterSet>, shared: &Shared) -> RootSource {
    let n = prep.adj.n();
    match starters {
        Some(s) => {
            let list = s
                .reps
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let excl = s.excluded_before(i, n);
                    let mapped = Bitset::from_indices(n, excl.iter().map(|v| prep.pos[v]));
                    (prep.pos[r], mapped.words().to_vec())
                })
                .collect();
            RootSource::Starters { list, next: 0 }
        }
        None => {
            let p = Bitset::full(n).words().to_vec();
            let (mut verts, mut colors) = (Vec::new(), Vec::new());
            let (mut su, mut sq) = (Vec::new(), Vec::new());
            let kmin = shared.goal().max(1);
            color_sort(
                &prep.adj,
                &p,
                kmin,
                &mut verts,
                &mut colors,
                &mut su,
                &mut sq,
            );
            RootSource::Colored { verts, colors, p }
        }
    }
}

fn drive(prep: &Prepared, starters: Option<&StarterSet>, shared: &Shared, threads: usize) {
    let gen = Mutex::new(TaskGen {
        adj: &prep.adj,
        shared,
        roots: roots(prep, starters, shared),
        current: None,
    });
    let work = |worker: &mut Worker| loop {
        let task = gen.lock().unwrap().next();
        match task {
            Some(t) => worker.run(t),
            None => break,
        }
    };
    if threads <= 1 {
        let mut w = Worker::new(&prep.adj, shared);
        work(&mut w);
        shared.nodes.fetch_add(w.nodes, Ordering::Relaxed);
        return;
    }
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| {
                let mut w = Worker::new(&prep.adj, shared);
                work(&mut w);
                shared.nodes.fetch_add(w.nodes, Ordering::Relaxed);
            });
        }
    });
}

fn new_shared(mode: Mode, best: usize, stop_at: usize, budget: Option<Duration>) -> Shared {
    Shared {
        mode,
        best: AtomicUsize::new(best),
        stop_at,
        stop: AtomicBool::new(best >= stop_at),
        timed_out: AtomicBool::new(false),
        deadline: budget.map(|b| Instant::now() + b),
        nodes: AtomicU64::new(0),
        witness: Mutex::new(Vec::new()),
        found: Mutex::new(Vec::new()),
    }
}

/// Maximum clique search, or a search for a clique of `target_size` if set.
pub fn max_clique(adj: &AdjacencyMatrix, config: &SearchConfig) -> SearchResult {
    let start = Instant::now();
    let n = adj.n();
    let prep = Prepared::new(adj);
    let base = match config.target_size {
        Some(k) => config.initial_lower_bound.max(k.saturating_sub(1)),
        None => config.initial_lower_bound,
    };
    let stop_at = match (config.target_size, config.upper_bound) {
        (Some(k), Some(u)) => k.min(u),
        (Some(k), None) => k,
        (None, Some(u)) => u,
        (None, None) => usize::MAX,
    };
    let shared = new_shared(Mode::Maximum, base, stop_at, config.time_budget);
    if n > 0 {
        drive(
            &prep,
            config.starters.as_ref(),
            &shared,
            config.thread_count(),
        );
    }
    let witness = prep.back(&shared.witness.lock().unwrap());
    assert!(adj.is_clique(&witness), "search produced a non-clique");
    let completed = !shared.timed_out.load(Ordering::SeqCst);
    let best = witness.len().max(base);
    let reached_stop = best >= stop_at;
    let (omega, upper_bound) = if !completed {
        (None, config.upper_bound)
    } else if reached_stop {
        match config.upper_bound {
            Some(u) if best >= u => (Some(best), Some(best)),
            u => (None, u),
        }
    } else if !witness.is_empty() && witness.len() > base {
        (Some(witness.len()), Some(witness.len()))
    } else {
        // nothing larger than the starting bound exists
        let omega = (base == 0 && n == 0).then_some(0);
        (omega, Some(base))
    };
    SearchResult {
        witness,
        omega,
        upper_bound,
        completed,
        nodes: shared.nodes.load(Ordering::SeqCst),
        wall_time: start.elapsed(),
    }
}

/// All k-cliques, or all k-cliques containing at least one starter. Each
/// clique is sorted and the list is in lexicographic order.
pub fn cliques_of_size(
    adj: &AdjacencyMatrix,
    k: usize,
    starters: Option<&[usize]>,
    threads: usize,
) -> Vec<Vec<usize>> {
    assert!(k >= 1, "clique size must be positive");
    if k > adj.n() {
        return Vec::new();
    }
    let prep = Prepared::new(adj);
    let shared = new_shared(Mode::Enumerate(k), 0, usize::MAX, None);
    let set = starters.map(|s| StarterSet::plain(s.to_vec()));
    let threads = if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    };
    drive(&prep, set.as_ref(), &shared, threads);
    let mut out: Vec<Vec<usize>> = shared
        .found
        .into_inner()
        .unwrap()
        .iter()
        .map(|c| prep.back(c))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(n: usize, density: f64, seed: u64) -> AdjacencyMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = AdjacencyMatrix::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(density) {
                    m.add_edge(u, v);
                }
            }
        }
        m
    }

    fn brute_omega(adj: &AdjacencyMatrix) -> usize {
        let n = adj.n();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let vs: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if vs.len() > best && adj.is_clique(&vs) {
                best = vs.len();
            }
        }
        best
    }

    fn brute_cliques(adj: &AdjacencyMatrix, k: usize) -> Vec<Vec<usize>> {
        let n = adj.n();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let vs: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if adj.is_clique(&vs) {
                out.push(vs);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn empty_and_complete() {
        let e = AdjacencyMatrix::new(7);
        let r = max_clique(&e, &SearchConfig::default());
        assert_eq!(r.omega, Some(1));
        assert_eq!(r.witness.len(), 1);
        let k =
            AdjacencyMatrix::from_edges(5, (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v))));
        let r = max_clique(&k, &SearchConfig::default());
        assert_eq!(r.omega, Some(5));
        assert_eq!(greedy_color_bound(&k, &Bitset::full(5)), 5);
        assert_eq!(greedy_color_bound(&e, &Bitset::full(7)), 1);
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        for seed in 0..60 {
            let n = 8 + (seed as usize % 9);
            let g = random_graph(n, 0.3 + 0.01 * seed as f64, seed);
            let omega = brute_omega(&g);
            for threads in [1, 3] {
                let cfg = SearchConfig {
                    threads,
                    ..Default::default()
                };
                let r = max_clique(&g, &cfg);
                assert_eq!(r.omega, Some(omega), "seed {seed}");
                assert!(r.completed);
            }
            assert!(greedy_color_bound(&g, &Bitset::full(n)) >= omega);
            for k in 1..=omega + 1 {
                assert_eq!(
                    cliques_of_size(&g, k, None, 2),
                    brute_cliques(&g, k),
                    "seed {seed} k {k}"
                );
            }
        }
    }

    #[test]
    fn target_and_bounds() {
        let g = random_graph(14, 0.5, 7);
        let omega = brute_omega(&g);
        let found = max_clique(
            &g,
            &SearchConfig {
                target_size: Some(omega),
                threads: 1,
                ..Default::default()
            },
        );
        assert!(found.witness.len() >= omega);
        let none = max_clique(
            &g,
            &SearchConfig {
                target_size: Some(omega + 1),
                threads: 1,
                ..Default::default()
            },
        );
        assert!(none.completed);
        assert_eq!(none.upper_bound, Some(omega));
        assert_eq!(none.omega, None);
        let capped = max_clique(
            &g,
            &SearchConfig {
                upper_bound: Some(omega),
                ..Default::default()
            },
        );
        assert_eq!(capped.omega, Some(omega));
    }

    #[test]
    fn starters_restrict_enumeration() {
        let g = random_graph(12, 0.6, 3);
        let all = brute_cliques(&g, 3);
        let starters = [2usize, 5];
        let expect: Vec<Vec<usize>> = all
            .into_iter()
            .filter(|c| c.iter().any(|v| starters.contains(v)))
            .collect();
        assert_eq!(cliques_of_size(&g, 3, Some(&starters), 1), expect);
        assert_eq!(
            cliques_of_size(&g, 1, Some(&starters), 1),
            vec![vec![2], vec![5]]
        );
    }

    #[test]
    fn single_thread_is_reproducible() {
        let g = random_graph(60, 0.5, 11);
        let cfg = SearchConfig {
            threads: 1,
            ..Default::default()
        };
        let a = max_clique(&g, &cfg);
        let b = max_clique(&g, &cfg);
        assert_eq!(a.witness, b.witness);
        assert_eq!(a.nodes, b.nodes);
    }

    #[test]
    fn zero_budget_reports_incomplete() {
        let g = random_graph(200, 0.9, 5);
        let r = max_clique(
            &g,
            &SearchConfig {
                time_budget: Some(Duration::ZERO),
                threads: 1,
                ..Default::default()
            },
        );
        // the clock is only read every 1024 nodes, so a dense graph is needed
        assert!(!r.completed);
        assert_eq!(r.omega, None);
    }
}

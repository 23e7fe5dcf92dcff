//! Good fundamental domains: ball form, tree form, point reduction, the
//! burning construction, certification and the Schottky test.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_rational::Rational64;
use rayon::prelude::*;
use thiserror::Error;

use crate::berkovich::{span_tree, Ball, BallError, BallKind, BerkPoint, MetricTree};
use crate::padic::PadicError;
use crate::proj::{letters, visit_orbits, GenSet, Mat2, ProjError, ProjPoint, Word};

/// Default step budget for point reduction.
pub const REDUCE_BUDGET: usize = 1000;

/// Default largest word length tried by [`good_position`].
pub const DEFAULT_MAX_M: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error(transparent)]
    Proj(#[from] ProjError),
    #[error("possible limit point: not reduced within {0} steps")]
    PossibleLimitPoint(usize),
    #[error("agent insufficient, increase m")]
    AgentInsufficient,
    #[error("inconclusive: no certified domain for word length up to m = {max_m}")]
    Inconclusive { max_m: usize },
    #[error("expected {expected} balls, got {got}")]
    BallCount { expected: usize, got: usize },
    #[error("domain not certified: {0}")]
    NotCertified(String),
}

/// First violated condition of the good-domain axioms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainViolation {
    BallCount { expected: usize, got: usize },
    /// Indices into `B_1..B_g, B_1'..B_g'`.
    Overlap(usize, usize),
    /// `γ_i(P¹∖B_i') ≠ B_i⁺` (or the inverse condition).
    Mapping { generator: usize, inverse: bool },
}

impl fmt::Display for DomainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainViolation::BallCount { expected, got } => {
                write!(f, "expected {expected} balls, got {got}")
            }
            DomainViolation::Overlap(i, j) => write!(f, "closed balls {i} and {j} intersect"),
            DomainViolation::Mapping { generator, inverse } => {
                if *inverse {
                    write!(f, "g{0}^-1 does not map the outside of B_{0} onto B_{0}'+", generator + 1)
                } else {
                    write!(f, "g{0} does not map the outside of B_{0}' onto B_{0}+", generator + 1)
                }
            }
        }
    }
}

/// Check the good-domain axioms for `gens` with balls `b` (the `B_i`) and
/// `b_prime` (the `B_i'`).
pub fn check_good_domain(
    gens: &[Mat2],
    b: &[Ball],
    b_prime: &[Ball],
) -> Result<Option<DomainViolation>, BallError> {
    let g = gens.len();
    if b.len() != g || b_prime.len() != g {
        return Ok(Some(DomainViolation::BallCount {
            expected: 2 * g,
            got: b.len() + b_prime.len(),
        }));
    }
    let all: Vec<&Ball> = b.iter().chain(b_prime.iter()).collect();
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            if !all[i].closures_disjoint(all[j])? {
                return Ok(Some(DomainViolation::Overlap(i, j)));
            }
        }
    }
    for i in 0..g {
        let fwd = gens[i].apply_ball(&b_prime[i].complement())?;
        if !fwd.same_as(&b[i].closure())? {
            return Ok(Some(DomainViolation::Mapping {
                generator: i,
                inverse: false,
            }));
        }
        let back = gens[i].adjugate().apply_ball(&b[i].complement())?;
        if !back.same_as(&b_prime[i].closure())? {
            return Ok(Some(DomainViolation::Mapping {
                generator: i,
                inverse: true,
            }));
        }
    }
    Ok(None)
}

impl Mat2 {
    fn apply_ball(&self, ball: &Ball) -> Result<Ball, BallError> {
        crate::berkovich::ball_image(self, ball)
    }
}

/// Generators with a good fundamental domain `P¹ ∖ (B_1 ∪ … ∪ B_g')`.
#[derive(Clone, Debug)]
pub struct GoodDomain {
    pub gens: Vec<Mat2>,
    /// Each generator as a word in the original input generators.
    pub words: Vec<Word>,
    pub b: Vec<Ball>,
    pub b_prime: Vec<Ball>,
}

impl GoodDomain {
    /// Domain for generators given directly (words are single letters).
    pub fn new(gens: Vec<Mat2>, b: Vec<Ball>, b_prime: Vec<Ball>) -> Self {
        let words = (1..=gens.len() as i32).map(Word::letter).collect();
        GoodDomain {
            gens,
            words,
            b,
            b_prime,
        }
    }

    pub fn g(&self) -> usize {
        self.gens.len()
    }

    /// Generators (as words and matrices), balls, `c` and `log_p d`.
    pub fn to_json(&self) -> Result<serde_json::Value, PadicError> {
        let mat = |m: &Mat2| {
            vec![
                vec![m.a.format_digits(), m.b.format_digits()],
                vec![m.c.format_digits(), m.d.format_digits()],
            ]
        };
        Ok(serde_json::json!({
            "words": self.words,
            "generators": self.gens.iter().map(mat).collect::<Vec<_>>(),
            "B": self.b.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
            "B_prime": self.b_prime.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
            "c": self.c()?.to_string(),
            "log_p_d": self.log_d().to_string(),
        }))
    }

    pub fn prime(&self) -> u32 {
        self.gens[0].prime()
    }

    pub fn gen_set(&self) -> GenSet {
        GenSet::new(&self.gens)
    }

    pub fn check(&self) -> Result<Option<DomainViolation>, BallError> {
        check_good_domain(&self.gens, &self.b, &self.b_prime)
    }

    /// Gauss points `P_1..P_g, P_1'..P_g'`.
    pub fn points(&self) -> Result<Vec<BerkPoint>, PadicError> {
        self.b
            .iter()
            .chain(self.b_prime.iter())
            .map(|b| b.gauss_point())
            .collect()
    }

    /// Minimum pairwise distance between the Gauss points.
    pub fn c(&self) -> Result<Rational64, PadicError> {
        let pts = self.points()?;
        let mut best: Option<Rational64> = None;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d = pts[i].distance(&pts[j]);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        Ok(best.unwrap_or_else(|| Rational64::from_integer(0)))
    }

    /// `log_p` of the smallest ball diameter (affine balls only).
    pub fn log_d(&self) -> Rational64 {
        self.b
            .iter()
            .chain(self.b_prime.iter())
            .filter(|b| b.kind == BallKind::Affine)
            .map(|b| -b.q)
            .min()
            .unwrap_or_else(|| Rational64::from_integer(0))
    }

    /// `z ∈ F`, i.e. `z` lies in none of the open balls.
    pub fn contains(&self, z: &ProjPoint) -> Result<bool, BallError> {
        for b in self.b.iter().chain(self.b_prime.iter()) {
            if b.contains(z)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `z ∈ F°`, i.e. `z` lies in none of the closed balls.
    pub fn interior_contains(&self, z: &ProjPoint) -> Result<bool, BallError> {
        for b in self.b.iter().chain(self.b_prime.iter()) {
            if b.closure().contains(z)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Move `z` into `F`. Returns the reduced point and the word `γ` with
    /// `reduced = γ·z`.
    pub fn reduce_point(&self, z: &ProjPoint) -> Result<(ProjPoint, Word), DomainError> {
        self.reduce_point_with_budget(z, REDUCE_BUDGET)
    }

    pub fn reduce_point_with_budget(
        &self,
        z: &ProjPoint,
        budget: usize,
    ) -> Result<(ProjPoint, Word), DomainError> {
        let gens = self.gen_set();
        let mut q = z.clone();
        let mut word: Vec<i32> = Vec::new();
        for _ in 0..budget {
            match self.step_letter(|b| b.contains(&q))? {
                None => return Ok((q, Word(word))),
                Some(l) => {
                    q = gens.letter(l).apply(&q)?;
                    word.insert(0, l);
                }
            }
        }
        Err(DomainError::PossibleLimitPoint(budget))
    }

    /// Reduction of a Berkovich point into the closure of the domain.
    pub fn reduce_berk(&self, x: &BerkPoint) -> Result<(BerkPoint, Word), DomainError> {
        let gens = self.gen_set();
        let mut q = x.clone();
        let mut word: Vec<i32> = Vec::new();
        for _ in 0..REDUCE_BUDGET {
            match self.step_letter(|b| b.contains_point(&q))? {
                None => return Ok((q, Word(word))),
                Some(l) => {
                    q = q.image(gens.letter(l))?;
                    word.insert(0, l);
                }
            }
        }
        Err(DomainError::PossibleLimitPoint(REDUCE_BUDGET))
    }

    /// `Some(i+1)` if the test holds on `B_i'`, `Some(-(i+1))` on `B_i`.
    fn step_letter<F>(&self, mut inside: F) -> Result<Option<i32>, BallError>
    where
        F: FnMut(&Ball) -> Result<bool, BallError>,
    {
        for i in 0..self.g() {
            if inside(&self.b_prime[i])? {
                return Ok(Some(i as i32 + 1));
            }
            if inside(&self.b[i])? {
                return Ok(Some(-(i as i32) - 1));
            }
        }
        Ok(None)
    }

    /// Replace generator `i` by its inverse (swapping `B_i` and `B_i'`).
    fn invert_generator(&mut self, i: usize) {
        self.gens[i] = self.gens[i].adjugate();
        self.words[i] = self.words[i].inverse();
        std::mem::swap(&mut self.b[i], &mut self.b_prime[i]);
    }
}

/// Boundary pair of a tree domain: `word` maps `(r_prime, q_prime)` to
/// `(q, r)`. `r`, `r_prime` lie in the domain, `q`, `q_prime` outside.
#[derive(Clone, Debug)]
pub struct BoundaryPair {
    pub r: BerkPoint,
    pub q: BerkPoint,
    pub r_prime: BerkPoint,
    pub q_prime: BerkPoint,
    pub word: Word,
}

/// A good fundamental domain in the tree spanned by the limit set.
#[derive(Clone, Debug)]
pub struct TreeDomain {
    pub vertices: Vec<BerkPoint>,
    pub edges: Vec<(BerkPoint, BerkPoint)>,
    pub pairs: Vec<BoundaryPair>,
}

/// Approximation of the tree spanned by the limit set together with the
/// identifications induced by single generators.
#[derive(Clone, Debug)]
pub struct Agent {
    pub tree: MetricTree,
    /// Kept vertices: branch points, leaves and the seed.
    pub vertices: Vec<BerkPoint>,
    pub adjacency: Vec<Vec<usize>>,
    pub leaf: Vec<bool>,
    pub seed: usize,
    /// `edge_class[(u, v)] = (class, W)` with `W` mapping the class
    /// representative onto the directed edge `u → v`.
    pub edge_class: HashMap<(usize, usize), (usize, Word)>,
    pub m: usize,
}

impl Agent {

    /// Group element mapping directed edge `e` onto `f`, if they are
    /// identified.
    pub fn conjugator(&self, e: (usize, usize), f: (usize, usize)) -> Option<Word> {
        let (ce, we) = self.edge_class.get(&e)?;
        let (cf, wf) = self.edge_class.get(&f)?;
        (ce == cf).then(|| wf.concat(&we.inverse()))
    }
}

/// Fixed points of every generator.
fn generator_fixed_points(gens: &GenSet) -> Result<Vec<ProjPoint>, ProjError> {
    let mut out = Vec::new();
    for m in gens.gens() {
        let e = m.eigen_data()?;
        out.push(e.f1);
        out.push(e.f2);
    }
    Ok(out)
}

/// Build the agent from the orbit of the generators' fixed points under
/// all words of length at most `m`. Type-1 points become closed balls of
/// depth `depth`.
pub fn build_agent(gens: &[Mat2], m: usize, depth: i64) -> Result<Agent, DomainError> {
    let gs = GenSet::new(gens);
    let fixed = generator_fixed_points(&gs)?;
    let finite: Vec<_> = fixed.iter().filter_map(|z| z.as_finite().cloned()).collect();
    if finite.is_empty() {
        return Err(DomainError::AgentInsufficient);
    }
    let seed_pt = finite
        .iter()
        .map(|z| BerkPoint::from_type1(z, depth))
        .reduce(|a, b| a.meet(&b))
        .unwrap();

    let mut pts: HashSet<BerkPoint> = HashSet::new();
    visit_orbits(&gs, m, &fixed, |_, orbit| {
        for z in orbit {
            if let ProjPoint::Finite(x) = z {
                pts.insert(BerkPoint::from_type1(x, depth));
            }
        }
        Ok(())
    })?;
    pts.insert(seed_pt.clone());
    // A rank-1 tree is a bare axis without branch points; the seed orbit
    // marks out the translates.
    let mut axis_marks: HashSet<BerkPoint> = HashSet::new();
    if gs.g() == 1 {
        for l in [1, -1] {
            let mut x = seed_pt.clone();
            for _ in 0..m {
                x = x.image(gs.letter(l))?;
                axis_marks.insert(x.clone());
            }
        }
        pts.extend(axis_marks.iter().cloned());
    }
    let pts: Vec<BerkPoint> = pts.into_iter().collect();
    let tree = span_tree(&pts);
    let seed_full = tree.find(&seed_pt).expect("seed is a tree vertex");
    let adj_full = tree.adjacency();

    // Keep vertices of degree other than 2, plus the seed.
    let keep: Vec<bool> = (0..tree.len())
        .map(|v| adj_full[v].len() != 2 || v == seed_full || axis_marks.contains(&tree.vertices[v]))
        .collect();
    let kept: Vec<usize> = (0..tree.len()).filter(|&v| keep[v]).collect();
    let mut new_id = vec![usize::MAX; tree.len()];
    for (i, &v) in kept.iter().enumerate() {
        new_id[v] = i;
    }
    let mut adjacency = vec![Vec::new(); kept.len()];
    for (i, &v) in kept.iter().enumerate() {
        for &start in &adj_full[v] {
            let (mut prev, mut cur) = (v, start);
            while !keep[cur] {
                let next = adj_full[cur].iter().copied().find(|&x| x != prev).unwrap();
                prev = cur;
                cur = next;
            }
            adjacency[i].push(new_id[cur]);
        }
    }
    let vertices: Vec<BerkPoint> = kept.iter().map(|&v| tree.vertices[v].clone()).collect();
    let leaf: Vec<bool> = kept.iter().map(|&v| adj_full[v].len() <= 1).collect();
    let seed = new_id[seed_full];

    // Images of non-leaf vertices under each letter.
    let index: HashMap<BerkPoint, usize> =
        vertices.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let lets = letters(gs.g());
    let images: Vec<Vec<Option<usize>>> = vertices
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            lets.iter()
                .map(|&l| {
                    if leaf[i] {
                        return None;
                    }
                    p.image(gs.letter(l)).ok().and_then(|q| index.get(&q).copied())
                })
                .collect()
        })
        .collect();

    // Directed edges and the generator links between them.
    let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (u, nb) in adjacency.iter().enumerate() {
        for &v in nb {
            edge_ids.insert((u, v), edges.len());
            edges.push((u, v));
        }
    }
    let mut links: Vec<Vec<(usize, i32)>> = vec![Vec::new(); edges.len()];
    for (e, &(u, v)) in edges.iter().enumerate() {
        for (k, &l) in lets.iter().enumerate() {
            if let (Some(a), Some(b)) = (images[u][k], images[v][k]) {
                if let Some(&f) = edge_ids.get(&(a, b)) {
                    links[e].push((f, l));
                    links[f].push((e, -l));
                }
            }
        }
    }
    let mut edge_class: HashMap<(usize, usize), (usize, Word)> = HashMap::new();
    let mut word_of: Vec<Option<Word>> = vec![None; edges.len()];
    let mut class_of = vec![usize::MAX; edges.len()];
    for root in 0..edges.len() {
        if word_of[root].is_some() {
            continue;
        }
        word_of[root] = Some(Word::identity());
        class_of[root] = root;
        let mut queue = VecDeque::from([root]);
        while let Some(e) = queue.pop_front() {
            let we = word_of[e].clone().unwrap();
            for &(f, l) in &links[e] {
                if word_of[f].is_none() {
                    word_of[f] = Some(Word::letter(l).concat(&we));
                    class_of[f] = root;
                    queue.push_back(f);
                }
            }
        }
    }
    for (e, &(u, v)) in edges.iter().enumerate() {
        edge_class.insert((u, v), (class_of[e], word_of[e].clone().unwrap()));
    }
    Ok(Agent {
        tree,
        vertices,
        adjacency,
        leaf,
        seed,
        edge_class,
        m,
    })
}

/// Grow a fundamental domain from the seed by burning along the agent,
/// pairing frontier edges that the agent identifies.
pub fn construct_tree_domain(agent: &Agent) -> Result<TreeDomain, DomainError> {
    let n = agent.vertices.len();
    let mut burned = vec![false; n];
    let mut v_set = vec![agent.seed];
    let mut e_set: Vec<(usize, usize)> = Vec::new();
    let mut pairs: Vec<(usize, usize, usize, usize, Word)> = Vec::new();
    let mut open: VecDeque<(usize, usize)> = VecDeque::new();
    burned[agent.seed] = true;

    let frontier_step = |q_prime: usize,
                             from: Option<usize>,
                             open: &mut VecDeque<(usize, usize)>,
                             pairs: &mut Vec<(usize, usize, usize, usize, Word)>| {
        for &qk in &agent.adjacency[q_prime] {
            if Some(qk) == from {
                continue;
            }
            let hit = open.iter().enumerate().find_map(|(idx, &(r, r_out))| {
                agent
                    .conjugator((qk, q_prime), (r, r_out))
                    .map(|w| (idx, r, r_out, w))
            });
            match hit {
                Some((idx, r, r_out, w)) => {
                    open.remove(idx);
                    pairs.push((r, r_out, q_prime, qk, w));
                }
                None => open.push_back((q_prime, qk)),
            }
        }
    };

    frontier_step(agent.seed, None, &mut open, &mut pairs);
    let mut steps = 0usize;
    while let Some((q, q_prime)) = open.pop_front() {
        steps += 1;
        if steps > 4 * n + 16 || agent.leaf[q_prime] || burned[q_prime] {
            return Err(DomainError::AgentInsufficient);
        }
        e_set.push((q, q_prime));
        burned[q_prime] = true;
        v_set.push(q_prime);
        frontier_step(q_prime, Some(q), &mut open, &mut pairs);
    }
    let pt = |i: usize| agent.vertices[i].clone();
    Ok(TreeDomain {
        vertices: v_set.iter().map(|&i| pt(i)).collect(),
        edges: e_set.iter().map(|&(a, b)| (pt(a), pt(b))).collect(),
        pairs: pairs
            .into_iter()
            .map(|(r, q, rp, qp, word)| BoundaryPair {
                r: pt(r),
                q: pt(q),
                r_prime: pt(rp),
                q_prime: pt(qp),
                word,
            })
            .collect(),
    })
}

/// The open ball cut off by the midpoint of the boundary edge `(r, q)`,
/// on the side of `q`.
pub fn midpoint_ball(r: &BerkPoint, q: &BerkPoint) -> Ball {
    let d = r.distance(q);
    let mid = r.toward(q, d / 2);
    if mid.contains(q) {
        Ball {
            kind: BallKind::Affine,
            center: q.center().clone(),
            q: mid.q(),
            closed: false,
        }
    } else {
        Ball {
            kind: BallKind::Complement,
            center: mid.center().clone(),
            q: mid.q(),
            closed: false,
        }
    }
}

/// Ball form of a tree domain; generators are the pair words evaluated on
/// `input`.
pub fn tree_domain_to_balls(input: &[Mat2], td: &TreeDomain) -> GoodDomain {
    let gs = GenSet::new(input);
    let mut gens = Vec::new();
    let mut words = Vec::new();
    let mut b = Vec::new();
    let mut b_prime = Vec::new();
    for pair in &td.pairs {
        gens.push(pair.word.eval(&gs));
        words.push(pair.word.clone());
        b.push(midpoint_ball(&pair.r, &pair.q));
        b_prime.push(midpoint_ball(&pair.r_prime, &pair.q_prime));
    }
    GoodDomain {
        gens,
        words,
        b,
        b_prime,
    }
}

/// Run the certification steps on a tree domain. On success returns the
/// ball form, which has also passed [`check_good_domain`].
pub fn certify_tree_domain(input: &[Mat2], td: &TreeDomain) -> Result<GoodDomain, DomainError> {
    let fail = |s: &str| Err(DomainError::NotCertified(s.to_string()));
    let g = input.len();
    if td.pairs.len() != g {
        return fail("number of boundary pairs differs from the rank");
    }
    // Connectivity of V ∪ E.
    let vset: HashSet<&BerkPoint> = td.vertices.iter().collect();
    let mut adj: HashMap<&BerkPoint, Vec<&BerkPoint>> = HashMap::new();
    for (a, b) in &td.edges {
        if !vset.contains(a) || !vset.contains(b) {
            return fail("edge leaves the vertex set");
        }
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    if let Some(start) = td.vertices.first() {
        let mut seen: HashSet<&BerkPoint> = HashSet::from([start]);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for y in adj.get(x).into_iter().flatten() {
                if seen.insert(*y) {
                    stack.push(*y);
                }
            }
        }
        if seen.len() != vset.len() {
            return fail("domain is not connected");
        }
    }
    // Terminal boundary edges.
    let mut outer: HashSet<&BerkPoint> = HashSet::new();
    for pair in &td.pairs {
        for (inner, out) in [(&pair.r, &pair.q), (&pair.r_prime, &pair.q_prime)] {
            if !vset.contains(inner) || vset.contains(out) || !outer.insert(out) {
                return fail("boundary edge is not terminal");
            }
        }
    }
    // Pairing.
    let gs = GenSet::new(input);
    let mats: Vec<Mat2> = td.pairs.iter().map(|p| p.word.eval(&gs)).collect();
    for (pair, a) in td.pairs.iter().zip(&mats) {
        if pair.r_prime.image(a)? != pair.q || pair.q_prime.image(a)? != pair.r {
            return fail("boundary pair not matched by its generator");
        }
    }
    let mut dom = tree_domain_to_balls(input, td);
    if let Some(v) = dom.check()? {
        return Err(DomainError::NotCertified(v.to_string()));
    }
    // Interior point.
    let on_boundary: HashSet<&BerkPoint> = td
        .pairs
        .iter()
        .flat_map(|p| [&p.r, &p.r_prime])
        .collect();
    let interior = match td.vertices.iter().find(|v| !on_boundary.contains(v)) {
        Some(v) => v.clone(),
        None => match td.edges.iter().max_by_key(|(a, b)| a.distance(b)) {
            Some((a, b)) => a.toward(b, a.distance(b) / 2),
            // A single vertex sits half an edge away from every ball.
            None if td.vertices.len() == 1 => td.vertices[0].clone(),
            None => return fail("no interior point"),
        },
    };
    // Every input generator must be generated by the new ones.
    for h in letters(g) {
        let hp = interior.image(gs.letter(h))?;
        let (back, _) = dom.reduce_berk(&hp)?;
        if back != interior {
            return fail("new generators do not generate the input group");
        }
    }
    canonicalize(&mut dom);
    Ok(dom)
}

fn shortlex(w: &Word) -> (usize, Vec<(u32, bool)>) {
    (
        w.len(),
        w.0.iter().map(|&l| (l.unsigned_abs(), l < 0)).collect(),
    )
}

/// Deterministic presentation: single inverse letters become positive,
/// otherwise the shortlex-smaller of `w` and `w^-1` is used; generators
/// are sorted by word.
fn canonicalize(dom: &mut GoodDomain) {
    for i in 0..dom.g() {
        let w = &dom.words[i];
        let flip = if w.len() == 1 {
            w.0[0] < 0
        } else {
            shortlex(&w.inverse()) < shortlex(w)
        };
        if flip {
            dom.invert_generator(i);
        }
    }
    let mut order: Vec<usize> = (0..dom.g()).collect();
    order.sort_by_key(|&i| shortlex(&dom.words[i]));
    fn take<T: Clone>(v: &[T], order: &[usize]) -> Vec<T> {
        order.iter().map(|&i| v[i].clone()).collect()
    }
    let gens = take(&dom.gens, &order);
    let words = take(&dom.words, &order);
    let b = take(&dom.b, &order);
    let b_prime = take(&dom.b_prime, &order);
    *dom = GoodDomain {
        gens,
        words,
        b,
        b_prime,
    };
}

/// Outcome of the Schottky test.
#[derive(Clone, Debug)]
pub enum SchottkyVerdict {
    /// New free generators (as words in the input) with a good domain,
    /// found with word length `m`.
    GoodPosition { domain: GoodDomain, m: usize },
    /// A nonempty reduced word evaluating to the identity.
    Relation(Word),
    /// A non-identity element that is not hyperbolic.
    NonHyperbolic(Word, Mat2),
}

impl SchottkyVerdict {
    pub fn kind(&self) -> &'static str {
        match self {
            SchottkyVerdict::GoodPosition { .. } => "GoodPosition",
            SchottkyVerdict::Relation(_) => "Relation",
            SchottkyVerdict::NonHyperbolic(..) => "NonHyperbolic",
        }
    }
}

/// Check every word of length exactly `len`; the first offending word in
/// enumeration order wins.
fn precheck_words(gs: &GenSet, len: usize) -> Result<Option<SchottkyVerdict>, DomainError> {
    fn rec(
        gs: &GenSet,
        len: usize,
        word: &mut Vec<i32>,
        mat: &Mat2,
    ) -> Result<Option<SchottkyVerdict>, DomainError> {
        if word.len() == len {
            if mat.is_scalar() {
                return Ok(Some(SchottkyVerdict::Relation(Word(word.clone()))));
            }
            if !mat.is_hyperbolic()? {
                return Ok(Some(SchottkyVerdict::NonHyperbolic(
                    Word(word.clone()),
                    mat.clone(),
                )));
            }
            return Ok(None);
        }
        for l in letters(gs.g()) {
            if word.last() == Some(&-l) {
                continue;
            }
            word.push(l);
            let r = rec(gs, len, word, &mat.mul(gs.letter(l)));
            word.pop();
            if let Some(v) = r? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }
    let results: Vec<Result<Option<SchottkyVerdict>, DomainError>> = letters(gs.g())
        .into_par_iter()
        .map(|l| rec(gs, len, &mut vec![l], gs.letter(l)))
        .collect();
    for r in results {
        if let Some(v) = r? {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// Doublings of the working precision tried when orbit points run out of
/// digits.
const PRECISION_RETRIES: u32 = 3;

/// One round of the good-position search at word length `m`. Long words
/// eat digits, so the orbit is recomputed at doubled precision when a
/// divisor is exhausted.
pub fn try_good_position(gens: &[Mat2], m: usize, depth: i64) -> Result<GoodDomain, DomainError> {
    let mut cap = gens[0].cap();
    for attempt in 0..=PRECISION_RETRIES {
        let work: Vec<Mat2> = gens.iter().map(|g| g.with_cap(cap)).collect();
        let round = build_agent(&work, m, depth)
            .and_then(|agent| construct_tree_domain(&agent))
            .and_then(|td| certify_tree_domain(&work, &td));
        match round {
            Err(DomainError::Padic(PadicError::PrecisionExhaustedDivisor)) if attempt < PRECISION_RETRIES => {
                cap *= 2;
            }
            r => return r,
        }
    }
    unreachable!()
}

/// Find generators in good position with a certified good fundamental
/// domain, or a witness that the input does not freely generate a
/// Schottky group.
pub fn good_position(gens: &[Mat2], max_m: usize) -> Result<SchottkyVerdict, DomainError> {
    let gs = GenSet::new(gens);
    let depth = gs.cap() as i64;
    for m in 1..=max_m {
        if let Some(v) = precheck_words(&gs, m)? {
            return Ok(v);
        }
        match try_good_position(gens, m, depth) {
            Ok(domain) => return Ok(SchottkyVerdict::GoodPosition { domain, m }),
            Err(DomainError::Proj(e)) => return Err(DomainError::Proj(e)),
            Err(_) => continue,
        }
    }
    Err(DomainError::Inconclusive { max_m })
}

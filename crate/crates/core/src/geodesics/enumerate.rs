//! Enumeration of closed geodesics up to a length cutoff.
//!
//! Tiles of the Dirichlet tiling are `g·F` for `F` the fundamental domain
//! about `o = i`. A conjugacy class of translation length `ℓ ≤ L` has a
//! representative whose axis meets `F`, and such a representative moves `o`
//! by at most `D = 2·asinh(sinh(L/2)·cosh R)` where `R` is the domain radius.
//! Both strategies visit every tile whose centre lies within `D` and keep the
//! hyperbolic elements whose axis passes within `R` of `o`.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use rayon::prelude::*;

use super::word::{canonical_cyclic, class_key, primitive_decompose, ClassKey, Letter, Relator, Word};
use super::{GeodesicRecord, GeodesicTable, GeodesicsError};
use crate::fuchsian::{self, length_from_trace, GroupElement, Mat2, QuaternionMatrix};
use crate::surfaces::{ArithmeticModel, SurfacePresentation};

const TIE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Depth-first walk of the nearest-neighbour spanning tree of the tiling.
    DepthFirst,
    /// Breadth-first search over word length with a visited set of orbit points.
    BreadthFirst,
}

#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    pub strategy: Strategy,
    /// Upper bound on bytes for the record set.
    pub memory_budget: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { strategy: Strategy::DepthFirst, memory_budget: 1 << 30, threads: None }
    }
}

/// Enumerates with default options.
pub fn enumerate(model: &SurfacePresentation, digest: [u8; 32], cutoff_l: f64) -> Result<GeodesicTable, GeodesicsError> {
    enumerate_with(model, digest, cutoff_l, &EnumerateOptions::default())
}

/// Rough byte count of a table with cutoff `l`: about `e^l / l` oriented
/// classes of `~ l` letters each, plus the per-record overhead.
fn estimated_bytes(l: f64, rank: usize) -> f64 {
    let classes = 2.0 * l.exp() / l.max(1.0);
    classes * (96.0 + 8.0 * rank as f64 + 2.0 * l)
}

fn suggest_cutoff(budget: u64, rank: usize) -> f64 {
    let (mut lo, mut hi) = (1.0, 60.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if estimated_bytes(mid, rank) <= budget as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn check_cutoff(cutoff_l: f64, rank: usize, budget: u64) -> Result<(), GeodesicsError> {
    if !(cutoff_l > 0.0 && cutoff_l.is_finite()) {
        return Err(GeodesicsError::InvalidCutoff(cutoff_l));
    }
    if estimated_bytes(cutoff_l, rank) > budget as f64 {
        return Err(GeodesicsError::MemoryBudget { requested: cutoff_l, suggested: suggest_cutoff(budget, rank) });
    }
    Ok(())
}

/// Enumerates every oriented closed geodesic with `ℓ ≤ cutoff_l`.
pub fn enumerate_with(
    model: &SurfacePresentation,
    digest: [u8; 32],
    cutoff_l: f64,
    opts: &EnumerateOptions,
) -> Result<GeodesicTable, GeodesicsError> {
    check_cutoff(cutoff_l, model.rank(), opts.memory_budget)?;
    let run = || match opts.strategy {
        Strategy::DepthFirst => dfs_classes(model, cutoff_l),
        Strategy::BreadthFirst => bfs_classes(model, cutoff_l),
    };
    let classes = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| std::io::Error::other(e.to_string()))?
            .install(run),
        None => run(),
    };
    let relator = Relator::new(model.relator.clone());
    let records = classes_to_records(classes.into_values(), &model.generators, model.rank(), cutoff_l, &relator)?;
    Ok(GeodesicTable::new(digest, cutoff_l, cutoff_l, model.rank(), records))
}

/// Bounds shared by both strategies.
struct Region {
    letters: Vec<Letter>,
    gens: Vec<Mat2>,
    /// cosh of the search radius.
    cosh_max: f64,
    /// cosh of the length cutoff.
    cosh_len: f64,
    cosh2_axis: f64,
}

impl Region {
    fn new(model: &SurfacePresentation, cutoff_l: f64, extra: f64) -> Region {
        let rank = model.rank();
        let letters: Vec<Letter> = (0..rank).map(Letter::gen).chain((0..rank).map(Letter::gen_inv)).collect();
        let mut letters = letters;
        letters.sort();
        let gens = letters
            .iter()
            .map(|l| if l.is_inverse() { model.generators[l.index()].inverse() } else { model.generators[l.index()] })
            .collect();
        let cosh_r = model.domain_radius.cosh();
        let d = 2.0 * ((cutoff_l / 2.0).sinh() * cosh_r).asinh();
        Region {
            letters,
            gens,
            cosh_max: (d + extra).cosh() * (1.0 + 1e-9),
            cosh_len: cutoff_l.cosh(),
            cosh2_axis: cosh_r * cosh_r * (1.0 + 1e-9),
        }
    }

    /// Whether `h` is a hyperbolic element of length at most the cutoff whose
    /// axis passes within the domain radius of `o`.
    fn keep(&self, h: &Mat2) -> bool {
        let t = h.abs_trace();
        if t <= 2.0 + 1e-12 {
            return false;
        }
        // cosh ℓ = t²/2 − 1
        if t * t / 2.0 - 1.0 > self.cosh_len * (1.0 + 1e-12) {
            return false;
        }
        let c = h.cosh_displacement();
        2.0 * (c - 1.0) / (t * t - 4.0) <= self.cosh2_axis
    }
}

type ClassMap = BTreeMap<Vec<u8>, ClassKey>;

fn insert_class(map: &mut ClassMap, word: &Word, relator: &Relator) {
    let key = class_key(word, relator);
    if !key.canon.is_empty() {
        map.entry(key.canon.to_bytes()).or_insert(key);
    }
}

/// Letter index (into `region.letters`) of the nearest neighbour of `h`.
fn parent_letter(region: &Region, h: &Mat2) -> usize {
    let mut best = 0;
    let mut best_c = f64::INFINITY;
    for (i, s) in region.gens.iter().enumerate() {
        let c = (*h * *s).cosh_displacement();
        if c < best_c * (1.0 - TIE_TOL) {
            best = i;
            best_c = c;
        }
    }
    best
}

fn dfs_classes(model: &SurfacePresentation, cutoff_l: f64) -> ClassMap {
    let region = Region::new(model, cutoff_l, 0.0);
    let relator = Relator::new(model.relator.clone());
    let inv_index: Vec<usize> = region
        .letters
        .iter()
        .map(|l| region.letters.iter().position(|m| *m == l.inverse()).expect("alphabet closed"))
        .collect();
    let roots: Vec<usize> = (0..region.letters.len()).collect();
    let parts: Vec<ClassMap> = roots
        .par_iter()
        .map(|&first| {
            let mut map = ClassMap::new();
            let h = region.gens[first];
            if h.cosh_displacement() > region.cosh_max || parent_letter(&region, &h) != inv_index[first] {
                return map;
            }
            let mut path = vec![region.letters[first]];
            let mut stack: Vec<(Mat2, usize)> = vec![(h, 0)];
            if region.keep(&h) {
                insert_class(&mut map, &Word::from_letters_unreduced(path.clone()), &relator);
            }
            while let Some(top) = stack.last_mut() {
                let (g, next) = (top.0, top.1);
                if next == region.gens.len() {
                    stack.pop();
                    path.pop();
                    continue;
                }
                top.1 += 1;
                if Some(&region.letters[inv_index[next]]) == path.last() {
                    continue;
                }
                let h = g * region.gens[next];
                if h.cosh_displacement() > region.cosh_max || parent_letter(&region, &h) != inv_index[next] {
                    continue;
                }
                path.push(region.letters[next]);
                if region.keep(&h) {
                    insert_class(&mut map, &Word::from_letters_unreduced(path.clone()), &relator);
                }
                stack.push((h, 0));
            }
            map
        })
        .collect();
    merge(parts)
}

fn merge(parts: Vec<ClassMap>) -> ClassMap {
    let mut out = ClassMap::new();
    for p in parts {
        for (k, v) in p {
            out.entry(k).or_insert(v);
        }
    }
    out
}

/// Orbit points `g·o` keyed by unit cells of their hyperboloid `(X, Y)`
/// coordinates. Distinct orbit points are at least 4 apart there.
#[derive(Default)]
struct OrbitSet {
    cells: HashMap<(i64, i64), Vec<(f64, f64)>>,
}

impl OrbitSet {
    fn coords(g: &Mat2) -> (f64, f64) {
        (0.5 * (g.a * g.a + g.b * g.b - g.c * g.c - g.d * g.d), g.a * g.c + g.b * g.d)
    }

    /// Inserts the orbit point of `g`; false if already present.
    fn insert(&mut self, g: &Mat2) -> bool {
        let (x, y) = Self::coords(g);
        let (cx, cy) = (x.floor() as i64, y.floor() as i64);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.cells.get(&(cx + dx, cy + dy)) {
                    if v.iter().any(|&(px, py)| (px - x).hypot(py - y) < 0.5) {
                        return false;
                    }
                }
            }
        }
        self.cells.entry((cx, cy)).or_default().push((x, y));
        true
    }
}

fn bfs_classes(model: &SurfacePresentation, cutoff_l: f64) -> ClassMap {
    // tiles meeting the search ball have centres within one domain radius more
    let region = Region::new(model, cutoff_l, model.domain_radius);
    let cosh_keep = {
        let cosh_r = model.domain_radius.cosh();
        (2.0 * ((cutoff_l / 2.0).sinh() * cosh_r).asinh()).cosh() * (1.0 + 1e-9)
    };
    let relator = Relator::new(model.relator.clone());
    let mut seen = OrbitSet::default();
    seen.insert(&Mat2::IDENTITY);
    let mut queue: VecDeque<(Mat2, Word)> = VecDeque::from([(Mat2::IDENTITY, Word::empty())]);
    let mut map = ClassMap::new();
    while let Some((g, w)) = queue.pop_front() {
        for (s, m) in region.letters.iter().zip(&region.gens) {
            let h = g * *m;
            let c = h.cosh_displacement();
            if c > region.cosh_max || !seen.insert(&h) {
                continue;
            }
            let hw = w.concat(&Word::new(vec![*s]));
            if c <= cosh_keep && region.keep(&h) {
                insert_class(&mut map, &hw, &relator);
            }
            queue.push_back((h, hw));
        }
    }
    map
}

fn classes_to_records(
    classes: impl Iterator<Item = ClassKey>,
    gens: &[Mat2],
    rank: usize,
    cutoff_l: f64,
    relator: &Relator,
) -> Result<Vec<GeodesicRecord>, GeodesicsError> {
    let mut out = Vec::new();
    for key in classes {
        // evaluated word shared with the inverse class
        let inv = canonical_cyclic(&key.canon.inverse(), relator);
        let rep = if inv.to_bytes() < key.canon.to_bytes() { &inv } else { &key.canon };
        let m = rep.evaluate(gens);
        let length = length_from_trace(m.abs_trace())?.value();
        if length > cutoff_l {
            continue;
        }
        let homology = key.canon.homology(rank);
        out.push(GeodesicRecord {
            primitive_length: length / key.power as f64,
            length,
            power: key.power,
            homology,
            canon: key.canon,
        });
    }
    Ok(out)
}

/// Enumerates hyperbolic elements of an arithmetic model reachable by words
/// of at most `max_word_len` letters, deduplicated exactly.
///
/// Classes are keyed by cyclic words over the supplied generators, so
/// multiplicities are those of the generated subgroup's word presentation and
/// `complete_below` is 0.
pub fn enumerate_arithmetic(
    model: &ArithmeticModel,
    digest: [u8; 32],
    cutoff_l: f64,
    max_word_len: usize,
) -> Result<GeodesicTable, GeodesicsError> {
    let rank = model.generators.len();
    check_cutoff(cutoff_l, rank, u64::MAX)?;
    let mut alphabet: Vec<(Letter, QuaternionMatrix)> = Vec::new();
    for (i, g) in model.generators.iter().enumerate() {
        alphabet.push((Letter::gen(i), g.clone()));
        alphabet.push((Letter::gen_inv(i), g.inverse()));
    }
    alphabet.sort_by_key(|(l, _)| *l);
    let id = QuaternionMatrix::identity(model.n as u64, model.p as u64);
    let mut seen: HashSet<QuaternionMatrix> = HashSet::from([id.psl_normalized()]);
    let mut frontier = vec![(id, Word::empty())];
    let relator = Relator::none();
    let mut map = ClassMap::new();
    let limit_trace = 2.0 * (cutoff_l / 2.0).cosh() * (1.0 + 1e-12);
    for _ in 0..max_word_len {
        let mut next = Vec::new();
        for (g, w) in &frontier {
            for (s, m) in &alphabet {
                let h = match fuchsian::mul_exact(&GroupElement::Exact(g.clone()), &GroupElement::Exact(m.clone()))? {
                    GroupElement::Exact(q) => q,
                    GroupElement::Float(_) => unreachable!(),
                };
                if !seen.insert(h.psl_normalized()) {
                    continue;
                }
                let hw = w.concat(&Word::new(vec![*s]));
                let t = GroupElement::Exact(h.clone()).abs_trace()?;
                if t > 2.0 && t <= limit_trace {
                    insert_class(&mut map, &hw, &relator);
                    insert_class(&mut map, &hw.inverse(), &relator);
                }
                next.push((h, hw));
            }
        }
        frontier = next;
    }
    let gens = model.float_generators()?;
    let mut records = classes_to_records(map.into_values(), &gens, rank, cutoff_l, &relator)?;
    // power from the free-group period
    for r in &mut records {
        let (_, k) = primitive_decompose(&r.canon);
        r.power = k;
        r.primitive_length = r.length / k as f64;
    }
    Ok(GeodesicTable::new(digest, cutoff_l, 0.0, rank, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::octagon_group;

    #[test]
    fn below_systole_is_empty() {
        let m = octagon_group();
        let t = enumerate(&m, [0; 32], 1.0).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn memory_budget_error_suggests_cutoff() {
        let m = octagon_group();
        let opts = EnumerateOptions { memory_budget: 1 << 20, ..Default::default() };
        match enumerate_with(&m, [0; 32], 30.0, &opts) {
            Err(GeodesicsError::MemoryBudget { suggested, .. }) => assert!(suggested > 1.0 && suggested < 30.0),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn small_table_traces_match_lengths() {
        let m = octagon_group();
        let t = enumerate(&m, [0; 32], 4.0).unwrap();
        assert!(!t.is_empty());
        for r in &t.records {
            let tr = r.canon.evaluate(&m.generators).abs_trace();
            assert!((tr - 2.0 * (r.length / 2.0).cosh()).abs() <= 1e-8 * tr);
            assert!((r.length - r.power as f64 * r.primitive_length).abs() <= 1e-9);
        }
    }
}

//! Exhaustive is-a flattening check against a brute-force fixpoint.

use std::collections::BTreeSet;

use skg_compat::model::{Etype, IsA, ObjectProperty, Skg};
use skg_compat::weights::{flatten_is_a, Rule};

/// Small schema on integer ids. Etype `n` is the anonymous one when present.
#[derive(Clone, Debug)]
pub struct Shape {
    pub named: usize,
    pub anonymous: bool,
    /// (sub, super)
    pub is_a: Vec<(usize, usize)>,
    /// (domain, range, parent property)
    pub props: Vec<(usize, usize, Option<usize>)>,
}

impl Shape {
    fn size(&self) -> usize {
        self.named + usize::from(self.anonymous)
    }

    /// Longest is-a chain among the named etypes.
    pub fn depth(&self) -> usize {
        let named: Vec<(usize, usize)> = self.is_a.iter().copied().filter(|&(_, p)| self.is_named(p)).collect();
        longest_chain(self.named, &named).expect("shapes are acyclic")
    }

    fn is_named(&self, e: usize) -> bool {
        e < self.named
    }

    fn name(&self, e: usize) -> String {
        if self.is_named(e) {
            format!("e{e}")
        } else {
            "_:anon".to_owned()
        }
    }
}

/// A shape's etypes and is-a edges, plus property slots reused across
/// cases so loading one only rewrites strings in place.
pub struct Scratch {
    skg: Skg,
    spare: Vec<ObjectProperty>,
    names: Vec<String>,
}

impl Scratch {
    pub fn new(s: &Shape) -> Self {
        let names: Vec<String> = (0..s.size()).map(|e| s.name(e)).collect();
        let mut skg = Skg::new("shape");
        for (e, name) in names.iter().enumerate() {
            skg.etypes.push(if s.is_named(e) {
                Etype::named(name)
            } else {
                Etype::anonymous(name)
            });
        }
        for &(sub, sup) in &s.is_a {
            skg.is_a_edges.push(IsA::new(&names[sub], &names[sup]));
        }
        Scratch {
            skg,
            spare: Vec::new(),
            names,
        }
    }

    /// Replaces the properties with `s.props`; etypes and is-a stay as built.
    pub fn load(&mut self, s: &Shape) -> &Skg {
        let props = &mut self.skg.object_properties;
        while props.len() > s.props.len() {
            self.spare.extend(props.pop());
        }
        while props.len() < s.props.len() {
            let i = props.len();
            let p = self.spare.pop().unwrap_or_else(|| ObjectProperty::new(format!("p{i}"), "", ""));
            debug_assert_eq!(p.id, format!("p{i}"));
            props.push(p);
        }
        for (p, &(d, r, parent)) in props.iter_mut().zip(&s.props) {
            set(&mut p.domain, &self.names[d]);
            set(&mut p.range, &self.names[r]);
            p.sub_property_of = parent.map(|q| format!("p{q}"));
        }
        &self.skg
    }
}

fn set(slot: &mut String, value: &str) {
    slot.clear();
    slot.push_str(value);
}

/// Where an edge came from: a declared property or a synthesized A->B.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Origin {
    Declared(usize),
    Synthesized(usize, usize),
}

pub type Fact = (usize, usize, Origin);

/// Rules applied to a fixpoint, with no ordering or indexing tricks:
/// a superclass gains A->B when all its direct subclasses reach B; every
/// edge is copied to each subclass of either endpoint unless a transitive
/// sub-property of its origin already joins that subclass to the other
/// endpoint or below it; finally anything touching the anonymous etype goes.
pub fn oracle(s: &Shape) -> Vec<Fact> {
    let m = s.size();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &(sub, sup) in &s.is_a {
        if !children[sup].contains(&sub) {
            children[sup].push(sub);
        }
    }
    // below[x][y]: y is a strict descendant of x
    let mut below = vec![vec![false; m]; m];
    for x in 0..m {
        let mut todo = children[x].clone();
        while let Some(c) = todo.pop() {
            if !below[x][c] {
                below[x][c] = true;
                todo.extend(children[c].iter().copied());
            }
        }
    }

    // (domain, range, direct sub-origins, name)
    let mut origins: Vec<(usize, usize, Vec<usize>, Origin)> = s
        .props
        .iter()
        .enumerate()
        .map(|(i, &(d, r, _))| {
            let subs = (0..s.props.len()).filter(|&j| s.props[j].2 == Some(i)).collect();
            (d, r, subs, Origin::Declared(i))
        })
        .collect();

    loop {
        let mut added = false;
        for a in 0..s.named {
            if children[a].is_empty() {
                continue;
            }
            for b in 0..s.named {
                let reaches = |x: usize| origins.iter().any(|o| o.0 == x && o.1 == b);
                if reaches(a) || !children[a].iter().all(|&k| reaches(k)) {
                    continue;
                }
                let sources: Vec<usize> = (0..origins.len())
                    .filter(|&i| children[a].contains(&origins[i].0) && origins[i].1 == b)
                    .collect();
                origins.push((a, b, sources, Origin::Synthesized(a, b)));
                added = true;
            }
        }
        if !added {
            break;
        }
    }

    let strict_subs: Vec<Vec<usize>> = (0..origins.len())
        .map(|o| {
            let mut out: Vec<usize> = Vec::new();
            let mut todo = origins[o].2.clone();
            while let Some(q) = todo.pop() {
                if !out.contains(&q) {
                    out.push(q);
                    todo.extend(origins[q].2.iter().copied());
                }
            }
            out
        })
        .collect();
    let at_or_below = |x: usize, y: usize| x == y || below[x][y];

    let mut facts: Vec<(usize, usize, usize)> = (0..origins.len()).map(|i| (origins[i].0, origins[i].1, i)).collect();
    loop {
        let mut fresh = Vec::new();
        for &(d, r, o) in &facts {
            for &c in &children[d] {
                if !strict_subs[o].iter().any(|&q| origins[q].0 == c && at_or_below(r, origins[q].1)) {
                    fresh.push((c, r, o));
                }
            }
            for &c in &children[r] {
                if !strict_subs[o].iter().any(|&q| origins[q].1 == c && at_or_below(d, origins[q].0)) {
                    fresh.push((d, c, o));
                }
            }
        }
        let before = facts.len();
        for f in fresh {
            if !facts.contains(&f) {
                facts.push(f);
            }
        }
        if facts.len() == before {
            break;
        }
    }
    let mut out: Vec<Fact> = facts
        .into_iter()
        .filter(|&(d, r, _)| s.is_named(d) && s.is_named(r))
        .map(|(d, r, o)| (d, r, origins[o].3))
        .collect();
    out.sort_unstable();
    out
}

fn etype_index(s: &Shape, id: &str) -> Result<usize, String> {
    id.strip_prefix('e')
        .and_then(|n| n.parse().ok())
        .filter(|&n| n < s.named)
        .ok_or_else(|| format!("unexpected etype '{id}'"))
}

/// What `flatten_is_a` produced, in the oracle's terms. `scratch` must come
/// from the same base shape.
pub fn observed_in(scratch: &mut Scratch, s: &Shape) -> Result<Vec<Fact>, String> {
    let flat = flatten_is_a(scratch.load(s)).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(flat.base.object_properties.len());
    for p in &flat.base.object_properties {
        let (d, r) = (etype_index(s, &p.domain)?, etype_index(s, &p.range)?);
        let origin_id = if !p.synthetic {
            p.id.as_str()
        } else {
            let pr = flat
                .provenance
                .iter()
                .find(|x| x.property == p.id)
                .ok_or(format!("no provenance for {}", p.id))?;
            match pr.rule {
                Rule::SynthesizeUp => p.id.as_str(),
                Rule::InheritDown | Rule::RestrictionInherit => pr.sources[0].as_str(),
            }
        };
        let origin = match origin_id.split_once("->") {
            Some((a, b)) => Origin::Synthesized(etype_index(s, a)?, etype_index(s, b)?),
            None => Origin::Declared(
                origin_id
                    .strip_prefix('p')
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| format!("unexpected property '{origin_id}'"))?,
            ),
        };
        out.push((d, r, origin));
    }
    out.sort_unstable();
    if out.windows(2).any(|w| w[0] == w[1]) {
        return Err("duplicate edge in output".into());
    }
    Ok(out)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn longest_chain(n: usize, edges: &[(usize, usize)]) -> Option<usize> {
    // None on a cycle
    fn walk(v: usize, edges: &[(usize, usize)], stack: &mut Vec<usize>) -> Option<usize> {
        if stack.contains(&v) {
            return None;
        }
        stack.push(v);
        let mut best = 0;
        for &(s, p) in edges {
            if s == v {
                best = best.max(1 + walk(p, edges, stack)?);
            }
        }
        stack.pop();
        Some(best)
    }
    (0..n).map(|v| walk(v, edges, &mut Vec::new())).try_fold(0, |acc, d| d.map(|d| acc.max(d)))
}

/// Is-a structures up to relabelling of the named etypes, each with its
/// automorphisms (as permutations over all etypes, anonymous one fixed).
pub fn base_shapes(max_named: usize, max_depth: usize) -> Vec<(Shape, Vec<Vec<usize>>)> {
    let mut out = Vec::new();
    for n in 1..=max_named {
        let perms = permutations(n);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|(a, b)| a != b).collect();
        let mut seen = BTreeSet::new();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
            if !longest_chain(n, &edges).is_some_and(|d| d <= max_depth) {
                continue;
            }
            for anon in 0..=(1u32 << n) - 1 {
                // anon == 0: no anonymous etype; otherwise the subset it restricts
                let mut all = edges.clone();
                all.extend((0..n).filter(|i| anon >> i & 1 == 1).map(|i| (i, n)));
                let key = |p: &[usize]| {
                    let mut k: Vec<(usize, usize)> = all.iter().map(|&(a, b)| (map(p, a), map(p, b))).collect();
                    k.sort_unstable();
                    k
                };
                let canon = perms.iter().map(|p| key(p)).min().unwrap();
                if !seen.insert((anon != 0, canon.clone())) {
                    continue;
                }
                let own = key(&(0..n).collect::<Vec<_>>());
                let auts: Vec<Vec<usize>> = perms
                    .iter()
                    .filter(|p| key(p) == own)
                    .map(|p| {
                        let mut full = p.clone();
                        full.push(n);
                        full
                    })
                    .collect();
                out.push((
                    Shape {
                        named: n,
                        anonymous: anon != 0,
                        is_a: all,
                        props: Vec::new(),
                    },
                    auts,
                ));
            }
        }
    }
    out
}

fn map(p: &[usize], x: usize) -> usize {
    p.get(x).copied().unwrap_or(x)
}

/// Calls `f` once per property multiset of size <= `max_props` that is
/// lexicographically least among its images under `auts`.
pub fn for_each_property_set(shape: &Shape, auts: &[Vec<usize>], max_props: usize, mut f: impl FnMut(&[(usize, usize)])) {
    let m = shape.size();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).collect();
    let mut chosen: Vec<usize> = Vec::new();
    fn rec(
        pairs: &[(usize, usize)],
        auts: &[Vec<usize>],
        max: usize,
        chosen: &mut Vec<usize>,
        f: &mut dyn FnMut(&[(usize, usize)]),
    ) {
        let list: Vec<(usize, usize)> = chosen.iter().map(|&i| pairs[i]).collect();
        let canonical = auts.iter().all(|p| {
            let mut img: Vec<(usize, usize)> = list.iter().map(|&(a, b)| (map(p, a), map(p, b))).collect();
            img.sort_unstable();
            img >= list
        });
        if !canonical {
            return;
        }
        f(&list);
        if chosen.len() == max {
            return;
        }
        let start = chosen.last().copied().unwrap_or(0);
        for i in start..pairs.len() {
            chosen.push(i);
            rec(pairs, auts, max, chosen, f);
            chosen.pop();
        }
    }
    rec(&pairs, auts, max_props, &mut chosen, &mut f);
}

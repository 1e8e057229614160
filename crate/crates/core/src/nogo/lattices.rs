//! Exhaustive enumeration of finite meet semilattices with unit, one
//! representative per isomorphism class.
//!
//! A finite meet semilattice with a top element is the same structure as a
//! finite lattice: finite meets give a global minimum, and joins are meets
//! of the (nonempty, thanks to the top) sets of common upper bounds. We
//! therefore enumerate lattices. Elements are placed top-down: each new
//! element picks a nonempty antichain of upper covers among the existing
//! ones. An element's upper set is frozen at insertion, later elements only
//! ever sit below it, so pairwise join existence can be checked per step
//! and never invalidated. A structure is kept when it reaches the target
//! size with a unique minimal element.

use crate::scalar::MeetAlg;
use std::collections::BTreeSet;

/// Upper-set bitmasks bound the size; 8 is all the suite needs.
const MAX_ELEMENTS: usize = 16;

/// All labeled structures with exactly `n` elements, as upper-set bitmask
/// vectors in insertion order: element 0 is the top and `ups[i]` contains
/// `i`. Each isomorphism class shows up once per descending linear
/// extension; `ups` determines the cover choices, so no labeled structure
/// is produced twice.
fn labeled_lattices(n: usize) -> Vec<Vec<u16>> {
    assert!((1..=MAX_ELEMENTS).contains(&n));
    let mut out = Vec::new();
    let mut ups: Vec<u16> = vec![1];
    grow(&mut ups, n, &mut out);
    out
}

fn grow(ups: &mut Vec<u16>, n: usize, out: &mut Vec<Vec<u16>>) {
    let k = ups.len();
    if k == n {
        if unique_minimal(ups) {
            out.push(ups.clone());
        }
        return;
    }
    'covers: for covers in 1u32..(1u32 << k) {
        let covers = covers as u16;
        let mut union = 1u16 << k;
        for i in 0..k {
            if covers & (1 << i) == 0 {
                continue;
            }
            // Antichain: no chosen element may lie below another one.
            if (ups[i] & !(1 << i)) & covers != 0 {
                continue 'covers;
            }
            union |= ups[i];
        }
        // The new element must have a join with every existing one: its
        // common upper bounds with x_j need a least element.
        for j in 0..k {
            let cu = union & ups[j];
            if !has_least(cu, ups) {
                continue 'covers;
            }
        }
        ups.push(union);
        grow(ups, n, out);
        ups.pop();
    }
}

/// Whether the set `s` of elements has a least member under the order
/// encoded by `ups` (least = a member whose upper set contains all of `s`).
fn has_least(s: u16, ups: &[u16]) -> bool {
    let mut m = s;
    while m != 0 {
        let l = m.trailing_zeros() as usize;
        if s & !ups[l] == 0 {
            return true;
        }
        m &= m - 1;
    }
    false
}

fn unique_minimal(ups: &[u16]) -> bool {
    let n = ups.len();
    let mut minimal = 0;
    for i in 0..n {
        if (0..n).all(|j| j == i || ups[j] & (1 << i) == 0) {
            minimal += 1;
        }
    }
    minimal == 1
}

/// The lexicographically least upper-set encoding over every top-down
/// relabeling. Isomorphic inputs agree on this; inequivalent ones differ,
/// since the encoding reconstructs the order.
fn canonical_encoding(ups: &[u16]) -> Vec<u16> {
    let n = ups.len();
    let strict: Vec<u16> = ups.iter().enumerate().map(|(i, u)| u & !(1u16 << i)).collect();
    let mut best: Option<Vec<u16>> = None;
    let mut new_pos = vec![usize::MAX; n];
    let mut rows: Vec<u16> = Vec::with_capacity(n);
    place(ups, &strict, 0, &mut new_pos, &mut rows, true, &mut best);
    best.expect("every finite order admits a top-down relabeling")
}

fn place(
    ups: &[u16],
    strict: &[u16],
    placed: u16,
    new_pos: &mut [usize],
    rows: &mut Vec<u16>,
    tight: bool,
    best: &mut Option<Vec<u16>>,
) {
    let n = ups.len();
    let pos = rows.len();
    if pos == n {
        if best.as_ref().map_or(true, |b| rows[..] < b[..]) {
            *best = Some(rows.clone());
        }
        return;
    }
    for cand in 0..n {
        if placed & (1 << cand) != 0 || strict[cand] & !placed != 0 {
            continue;
        }
        let mut row = 1u16 << pos;
        let mut above = ups[cand] & placed;
        while above != 0 {
            let o = above.trailing_zeros() as usize;
            row |= 1 << new_pos[o];
            above &= above - 1;
        }
        let mut t = tight;
        if let Some(b) = best.as_ref() {
            if t {
                if row > b[pos] {
                    continue;
                }
                if row < b[pos] {
                    t = false;
                }
            }
        }
        new_pos[cand] = pos;
        rows.push(row);
        place(ups, strict, placed | (1 << cand), new_pos, rows, t, best);
        rows.pop();
        new_pos[cand] = usize::MAX;
    }
}

fn meet_table(ups: &[u16]) -> Vec<Vec<usize>> {
    let n = ups.len();
    let mut downs = vec![0u16; n];
    for j in 0..n {
        let mut m = ups[j];
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            downs[i] |= 1 << j;
            m &= m - 1;
        }
    }
    let mut table = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in 0..n {
            let cl = downs[a] & downs[b];
            let mut glb = None;
            let mut m = cl;
            while m != 0 {
                let l = m.trailing_zeros() as usize;
                if cl & !downs[l] == 0 {
                    glb = Some(l);
                    break;
                }
                m &= m - 1;
            }
            table[a][b] = glb.expect("join closed orders with a bottom have all meets");
        }
    }
    table
}

fn element_names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

/// One representative per isomorphism class of meet semilattices with unit
/// on exactly `n` elements, in deterministic order. Elements are named
/// `a`, `b`, ... with `a` the top; the tables are revalidated by
/// `MeetAlg::new` on the way out.
pub fn lattices_of_size(n: usize) -> Vec<MeetAlg> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for ups in labeled_lattices(n) {
        let canon = canonical_encoding(&ups);
        if seen.insert(canon.clone()) {
            let alg = MeetAlg::new(element_names(n), meet_table(&canon))
                .expect("generated tables are semilattices");
            debug_assert_eq!(alg.top(), 0);
            out.push(alg);
        }
    }
    out
}

/// Representatives of every class with 1 up to `max` elements.
pub fn lattices_up_to(max: usize) -> Vec<MeetAlg> {
    (1..=max).flat_map(lattices_of_size).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent brute force for small sizes: run over all transitively
    /// closed strict relations on {0..n-1} that only relate i < j upward,
    /// i.e. posets labeled along an ascending linear extension, and keep
    /// the ones with all pairwise joins and a unique minimal element.
    fn brute_force_lattices(n: usize) -> Vec<Vec<u16>> {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << pairs.len()) {
            let mut ups = vec![0u16; n];
            for (i, u) in ups.iter_mut().enumerate() {
                *u = 1 << i;
            }
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    ups[i] |= 1 << j;
                }
            }
            let closed = ups.clone();
            let mut closure = ups.clone();
            for k in 0..n {
                for i in 0..n {
                    if closure[i] & (1 << k) != 0 {
                        closure[i] |= closure[k];
                    }
                }
            }
            if closure != closed {
                continue;
            }
            let join_closed =
                (0..n).all(|a| (a + 1..n).all(|b| has_least(ups[a] & ups[b], &ups)));
            if join_closed && unique_minimal(&ups) {
                out.push(ups);
            }
        }
        out
    }

    fn relabel(ups: &[u16], perm: &[usize]) -> Vec<u16> {
        let n = ups.len();
        let mut out = vec![0u16; n];
        for i in 0..n {
            let mut m = ups[i];
            while m != 0 {
                let j = m.trailing_zeros() as usize;
                out[perm[i]] |= 1 << perm[j];
                m &= m - 1;
            }
        }
        out
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for slot in 0..n {
                let mut q: Vec<usize> = p.iter().map(|&x| x + usize::from(x >= slot)).collect();
                q.push(slot);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn class_counts_match_published_values_small() {
        let expected = [1usize, 1, 1, 2, 5, 15, 53];
        for (n, want) in expected.iter().enumerate().map(|(i, w)| (i + 1, *w)) {
            assert_eq!(lattices_of_size(n).len(), want, "size {n}");
        }
    }

    #[test]
    fn brute_force_agrees_on_classes_up_to_five() {
        for n in 1..=5 {
            let mut canon = BTreeSet::new();
            for ups in brute_force_lattices(n) {
                canon.insert(canonical_encoding(&ups));
            }
            let direct: BTreeSet<Vec<u16>> = labeled_lattices(n)
                .iter()
                .map(|u| canonical_encoding(u))
                .collect();
            assert_eq!(canon, direct, "size {n}");
        }
    }

    #[test]
    fn labeled_counts_from_automorphism_sums() {
        // Sum of n!/|Aut| over classes = number of lattice structures on a
        // labeled n-set: 1, 2, 6, 36, 380 for n = 1..5.
        let expected = [1usize, 2, 6, 36, 380];
        for (n, want) in expected.iter().enumerate().map(|(i, w)| (i + 1, *w)) {
            let perms = permutations(n);
            let mut total = 0;
            for ups in labeled_lattices(n)
                .iter()
                .map(|u| canonical_encoding(u))
                .collect::<BTreeSet<_>>()
            {
                let distinct: BTreeSet<Vec<u16>> =
                    perms.iter().map(|p| relabel(&ups, p)).collect();
                total += distinct.len();
            }
            assert_eq!(total, want, "size {n}");
        }
    }

    #[test]
    fn canonical_encoding_is_relabeling_invariant() {
        for alg in lattices_up_to(6) {
            let n = alg.size();
            let ups = {
                // Rebuild upper sets from the meet table: a <= b iff a ^ b = a.
                let mut ups = vec![0u16; n];
                for a in 0..n {
                    for b in 0..n {
                        if alg.meet_of(a, b) == a {
                            ups[a] |= 1 << b;
                        }
                    }
                }
                ups
            };
            let base = canonical_encoding(&ups);
            let rotate: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
            let reverse: Vec<usize> = (0..n).rev().collect();
            for p in [rotate, reverse] {
                assert_eq!(canonical_encoding(&relabel(&ups, &p)), base);
            }
        }
    }

    #[test]
    fn size_four_is_the_chain_and_the_diamond() {
        let reps = lattices_of_size(4);
        assert_eq!(reps.len(), 2);
        let chains = reps
            .iter()
            .filter(|alg| {
                (0..4).all(|a| {
                    (0..4).all(|b| alg.meet_of(a, b) == a || alg.meet_of(a, b) == b)
                })
            })
            .count();
        assert_eq!(chains, 1);
    }

    #[test]
    fn representatives_have_top_first() {
        for alg in lattices_up_to(5) {
            assert_eq!(alg.top(), 0);
            assert_eq!(alg.element_names()[0], "a");
        }
    }
}

//! Connected components of label maps and orphan-fragment absorption.

use std::collections::BTreeMap;

use crate::types::{Dims, LabelMap};

/// Face-connected components (4-connected in 2D, 6-connected in 3D) of
/// equal-label pixels. Returns the component id of every pixel and the
/// number of components; ids follow scan order.
pub fn label_components(labels: &LabelMap) -> (Vec<u32>, usize) {
    let dims = labels.dims();
    let lab = labels.labels();
    let mut comp = vec![u32::MAX; lab.len()];
    let mut stack = Vec::new();
    let mut nbrs = Vec::with_capacity(6);
    let mut count = 0u32;
    for seed in 0..lab.len() {
        if comp[seed] != u32::MAX {
            continue;
        }
        comp[seed] = count;
        stack.push(seed);
        while let Some(p) = stack.pop() {
            dims.face_neighbors(p, &mut nbrs);
            for &q in &nbrs {
                if comp[q] == u32::MAX && lab[q] == lab[p] {
                    comp[q] = count;
                    stack.push(q);
                }
            }
        }
        count += 1;
    }
    (comp, count as usize)
}

/// True when every label occupies exactly one connected component.
pub fn is_connected_partition(labels: &LabelMap) -> bool {
    let (_, count) = label_components(labels);
    count == labels.label_count()
}

/// Makes every label a single connected region. For each label the largest
/// component keeps the label; every other fragment is absorbed by the
/// adjacent superpixel with which it shares the most pixel edges (ties go to
/// the lowest label). Labels of the kept components are unchanged.
pub fn enforce_connectivity(labels: &LabelMap) -> LabelMap {
    enforce_connectivity_within(labels, None)
}

/// As [`enforce_connectivity`], but fragments are only absorbed by
/// superpixels in the same region of `regions`.
pub fn enforce_connectivity_within(labels: &LabelMap, regions: Option<&[u32]>) -> LabelMap {
    let dims = labels.dims();
    let lab = labels.labels();
    let (comp_of, ncomp) = label_components(labels);

    let mut comp_label = vec![0u32; ncomp];
    let mut pixels: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (p, &c) in comp_of.iter().enumerate() {
        comp_label[c as usize] = lab[p];
        pixels[c as usize].push(p);
    }

    let mut main_of_label: BTreeMap<u32, usize> = BTreeMap::new();
    for c in 0..ncomp {
        let best = main_of_label.entry(comp_label[c]).or_insert(c);
        if pixels[c].len() > pixels[*best].len() {
            *best = c;
        }
    }
    let mut is_main = vec![false; ncomp];
    for &c in main_of_label.values() {
        is_main[c] = true;
    }
    if main_of_label.len() == ncomp {
        return labels.clone();
    }

    let mut parent: Vec<usize> = (0..ncomp).collect();
    fn find(parent: &mut [usize], mut c: usize) -> usize {
        while parent[c] != c {
            parent[c] = parent[parent[c]];
            c = parent[c];
        }
        c
    }

    let mut orphans: Vec<usize> = (0..ncomp).filter(|&c| !is_main[c]).collect();
    orphans.sort_by_key(|&c| (pixels[c].len(), c));
    let mut next_label = labels.label_bound() as u32;
    let mut nbrs = Vec::with_capacity(6);

    loop {
        let mut pending = false;
        for &c in &orphans {
            if find(&mut parent, c) != c || is_main[c] {
                continue;
            }
            pending = true;
            // label -> (edge count, best root, its edge count, root is main)
            let mut by_label: BTreeMap<u32, (usize, usize, usize, bool)> = BTreeMap::new();
            let mut per_root: BTreeMap<usize, usize> = BTreeMap::new();
            for &p in &pixels[c] {
                dims.face_neighbors(p, &mut nbrs);
                for &q in &nbrs {
                    if let Some(reg) = regions {
                        if reg[q] != reg[p] {
                            continue;
                        }
                    }
                    let r = find(&mut parent, comp_of[q] as usize);
                    if r != c {
                        *per_root.entry(r).or_insert(0) += 1;
                    }
                }
            }
            for (&r, &n) in &per_root {
                let e = by_label.entry(comp_label[r]).or_insert((0, r, 0, is_main[r]));
                e.0 += n;
                let better = (n, is_main[r]) > (e.2, e.3);
                if better {
                    e.1 = r;
                    e.2 = n;
                    e.3 = is_main[r];
                }
            }
            let target = by_label
                .iter()
                .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.0.cmp(a.0)))
                .map(|(_, v)| v.1);
            match target {
                Some(t) => {
                    parent[c] = t;
                    let moved = std::mem::take(&mut pixels[c]);
                    pixels[t].extend(moved);
                }
                None => {
                    // Isolated fragment: keep it as its own superpixel.
                    comp_label[c] = next_label;
                    next_label += 1;
                    is_main[c] = true;
                }
            }
        }
        if !pending {
            break;
        }
    }

    let out: Vec<u32> = comp_of
        .iter()
        .map(|&c| comp_label[find(&mut parent, c as usize)])
        .collect();
    LabelMap::from_dims(dims, out).expect("same dimensions")
}

pub(crate) fn boundary_mask(dims: Dims, labels: &[u32]) -> Vec<bool> {
    let mut nbrs = Vec::with_capacity(6);
    (0..labels.len())
        .map(|p| {
            dims.face_neighbors(p, &mut nbrs);
            nbrs.iter().any(|&q| labels[q] != labels[p])
        })
        .collect()
}

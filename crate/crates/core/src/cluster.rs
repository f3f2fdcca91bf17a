//! Grouping of overlapping B1 boxes into B2 candidate regions.

use crate::segment::{PixelBox, Tier, UnionFind};

/// Replaces every cluster of transitively overlapping boxes by its enclosing
/// box, repeating until no two output boxes overlap.
///
/// Output boxes are tagged [`Tier::B2`] and sorted by `(y_min, x_min)`.
pub fn merge_overlapping_boxes(boxes: &[PixelBox]) -> Vec<PixelBox> {
    let mut current: Vec<PixelBox> = boxes.iter().map(|b| b.with_tier(Tier::B2)).collect();
    loop {
        let (merged, changed) = merge_pass(&current);
        current = merged;
        if !changed {
            break;
        }
    }
    current.sort_by_key(PixelBox::raster_key);
    current
}

/// One round of overlap-closure merging. Returns whether any pair merged.
fn merge_pass(boxes: &[PixelBox]) -> (Vec<PixelBox>, bool) {
    let n = boxes.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (boxes[i].x_min, i));

    let mut uf = UnionFind::new(n);
    let mut changed = false;
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            // sorted on x_min: nothing further right can reach box i
            if boxes[j].x_min > boxes[i].x_max {
                break;
            }
            if boxes[i].overlaps(&boxes[j]) {
                changed |= uf.union(i, j);
            }
        }
    }
    if !changed {
        return (boxes.to_vec(), false);
    }

    let mut slot = vec![usize::MAX; n];
    let mut out: Vec<PixelBox> = Vec::new();
    for i in 0..n {
        let root = uf.find(i);
        if slot[root] == usize::MAX {
            slot[root] = out.len();
            out.push(boxes[i]);
        } else {
            let s = slot[root];
            out[s] = out[s].union(&boxes[i]);
        }
    }
    (out, true)
}

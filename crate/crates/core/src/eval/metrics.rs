use std::collections::BTreeSet;

/// Share of the ground truth that was retrieved. An empty truth counts as
/// fully covered only by an empty retrieval.
pub fn cvg<T: Ord>(retrieved: &BTreeSet<T>, truth: &BTreeSet<T>) -> f64 {
    if truth.is_empty() {
        return if retrieved.is_empty() { 1.0 } else { 0.0 };
    }
    retrieved.intersection(truth).count() as f64 / truth.len() as f64
}

/// Intersection over union; 1 when both sets are empty.
pub fn iou<T: Ord>(retrieved: &BTreeSet<T>, truth: &BTreeSet<T>) -> f64 {
    let union = retrieved.union(truth).count();
    if union == 0 {
        return 1.0;
    }
    retrieved.intersection(truth).count() as f64 / union as f64
}

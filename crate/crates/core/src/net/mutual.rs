use crate::net::Corr4D;
use crate::scalar::Real;

/// Mutual nearest-neighbour filtering of a single-channel correlation.
///
/// Scores are first clamped at zero. Each entry is then scaled by its
/// ratio to the best score over all target positions for the same source
/// position, and by its ratio to the best score over all source positions
/// for the same target position. A zero maximum yields zero ratios.
pub fn mutual_matching<T: Real>(corr: &Corr4D<T>) -> Corr4D<T> {
    assert_eq!(corr.channels(), 1, "mutual matching runs on single-channel volumes");
    let c = corr.relu();
    let [ht, wt, hs, ws] = c.dims();
    let (nt, ns) = (ht * wt, hs * ws);
    let data = c.data();
    // best over target positions, per source position
    let mut source_max = vec![0.0f64; ns];
    // best over source positions, per target position
    let mut target_max = vec![0.0f64; nt];
    for t in 0..nt {
        for s in 0..ns {
            let v = data[t * ns + s].widen();
            source_max[s] = source_max[s].max(v);
            target_max[t] = target_max[t].max(v);
        }
    }
    let ratio = |v: f64, m: f64| if m > 0.0 { v / m } else { 0.0 };
    let mut out = Corr4D::zeros(c.dims(), 1);
    for (idx, o) in out.data_mut().iter_mut().enumerate() {
        let (t, s) = (idx / ns, idx % ns);
        let v = data[idx].widen();
        let r = ratio(v, source_max[s]) * ratio(v, target_max[t]);
        *o = T::narrow(r * v);
    }
    out
}

//! Exact discrete optimal transport by successive shortest paths.
//!
//! Dense bipartite formulation: sources carry the first measure's
//! weights, sinks the second's. Dijkstra with node potentials runs on the
//! residual graph (forward arcs uncapacitated, backward arcs capped by
//! current flow); each augmentation exhausts a supply, a demand, or a
//! backward arc. No entropic smoothing is involved, so the returned cost
//! is the linear-program optimum up to floating-point rounding.

const EPS: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct TransportPlan {
    pub cost: f64,
    /// Row-major `supply.len() × demand.len()` flow matrix.
    pub flow: Vec<f64>,
}

pub fn min_cost_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> TransportPlan {
    let n = supply.len();
    let m = demand.len();
    assert_eq!(cost.len(), n * m, "cost matrix shape");
    let c = |i: usize, j: usize| cost[i * m + j];

    let mut sup = supply.to_vec();
    let mut dem = demand.to_vec();
    let mut flow = vec![0.0; n * m];
    let mut pot_src = vec![0.0; n];
    let mut pot_snk = vec![0.0; m];

    // parent of sink j: source i; parent of source i: sink j (via backward arc)
    let mut dist_src = vec![0.0; n];
    let mut dist_snk = vec![0.0; m];
    let mut par_snk = vec![usize::MAX; m];
    let mut par_src = vec![usize::MAX; n];
    let mut done_src = vec![false; n];
    let mut done_snk = vec![false; m];

    let max_iters = 4 * (n + m) * (n + m) + 16;
    for _ in 0..max_iters {
        let remaining: f64 = sup.iter().sum::<f64>().min(dem.iter().sum::<f64>());
        if remaining <= 1e-14 || !sup.iter().any(|&s| s > EPS) || !dem.iter().any(|&d| d > EPS) {
            break;
        }

        for i in 0..n {
            dist_src[i] = if sup[i] > EPS { 0.0 } else { f64::INFINITY };
            par_src[i] = usize::MAX;
            done_src[i] = false;
        }
        for j in 0..m {
            dist_snk[j] = f64::INFINITY;
            par_snk[j] = usize::MAX;
            done_snk[j] = false;
        }

        // dense Dijkstra over n + m nodes
        loop {
            let mut best = f64::INFINITY;
            let mut pick: Option<(bool, usize)> = None;
            for i in 0..n {
                if !done_src[i] && dist_src[i] < best {
                    best = dist_src[i];
                    pick = Some((true, i));
                }
            }
            for j in 0..m {
                if !done_snk[j] && dist_snk[j] < best {
                    best = dist_snk[j];
                    pick = Some((false, j));
                }
            }
            let Some((is_src, u)) = pick else { break };
            if is_src {
                done_src[u] = true;
                for j in 0..m {
                    if done_snk[j] {
                        continue;
                    }
                    let rc = (c(u, j) + pot_src[u] - pot_snk[j]).max(0.0);
                    let nd = best + rc;
                    if nd < dist_snk[j] {
                        dist_snk[j] = nd;
                        par_snk[j] = u;
                    }
                }
            } else {
                done_snk[u] = true;
                for i in 0..n {
                    if done_src[i] || flow[i * m + u] <= EPS {
                        continue;
                    }
                    let rc = (-c(i, u) + pot_snk[u] - pot_src[i]).max(0.0);
                    let nd = best + rc;
                    if nd < dist_src[i] {
                        dist_src[i] = nd;
                        par_src[i] = u;
                    }
                }
            }
        }

        let mut target = None;
        let mut best = f64::INFINITY;
        for j in 0..m {
            if dem[j] > EPS && dist_snk[j] < best {
                best = dist_snk[j];
                target = Some(j);
            }
        }
        let Some(t) = target else { break };

        for i in 0..n {
            pot_src[i] += dist_src[i].min(best);
        }
        for j in 0..m {
            pot_snk[j] += dist_snk[j].min(best);
        }

        // walk back to the originating source, collecting the bottleneck
        let mut bottleneck = dem[t];
        let mut j = t;
        let origin = loop {
            let i = par_snk[j];
            let back = par_src[i];
            if back == usize::MAX {
                break i;
            }
            bottleneck = bottleneck.min(flow[i * m + back]);
            j = back;
        };
        bottleneck = bottleneck.min(sup[origin]);

        let mut j = t;
        loop {
            let i = par_snk[j];
            flow[i * m + j] += bottleneck;
            let back = par_src[i];
            if back == usize::MAX {
                break;
            }
            flow[i * m + back] -= bottleneck;
            if flow[i * m + back] < EPS {
                flow[i * m + back] = 0.0;
            }
            j = back;
        }
        sup[origin] -= bottleneck;
        dem[t] -= bottleneck;
    }

    let total = flow.iter().zip(cost).map(|(f, c)| f * c).sum();
    TransportPlan { cost: total, flow }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_assignment() {
        // the cheap diagonal must be chosen over the expensive cross
        let plan = min_cost_transport(&[0.5, 0.5], &[0.5, 0.5], &[1.0, 3.0, 3.0, 1.0]);
        assert!((plan.cost - 1.0).abs() < 1e-15);
    }

    #[test]
    fn requires_rerouting() {
        // greedy picks (0,0) first and must be undone through a backward arc
        let cost = [0.0, 1.0, 1.0, 100.0];
        let plan = min_cost_transport(&[0.5, 0.5], &[0.5, 0.5], &cost);
        assert!((plan.cost - 1.0).abs() < 1e-12, "{}", plan.cost);
    }

    #[test]
    fn marginals_respected() {
        let sup = [0.2, 0.3, 0.5];
        let dem = [0.6, 0.4];
        let cost = [0.3, 0.9, 0.1, 0.7, 0.5, 0.2];
        let plan = min_cost_transport(&sup, &dem, &cost);
        for i in 0..3 {
            let row: f64 = plan.flow[i * 2..i * 2 + 2].iter().sum();
            assert!((row - sup[i]).abs() < 1e-14);
        }
        for j in 0..2 {
            let col: f64 = (0..3).map(|i| plan.flow[i * 2 + j]).sum();
            assert!((col - dem[j]).abs() < 1e-14);
        }
    }
}

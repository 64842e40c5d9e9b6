use super::ThermalModel;
use crate::error::{Error, Result};
use crate::gates::{gibbs_check, named_gate, q_mixed_channel, Connectivity, Gate, GateSet};
use crate::quantum::kron;

/// Finite Gibbs-preserving set for `model`.
///
/// Diagonal phase gates commute with Γ and act on any edge. SWAP is added on
/// pairs with equal gaps. For each edge, the channels (1 − q)·U·U† + q·tr(·)·γ_ab
/// with U ∈ {I, CZ} and q ∈ {¼, ½} are added, restricted to that edge.
pub fn gibbs_preserving_set(model: &ThermalModel, connectivity: Connectivity) -> Result<GateSet> {
    let n = model.n();
    let mut gates = Vec::new();
    for name in ["CZ", "ZI", "IZ", "SI", "IS"] {
        gates.push(Gate::unitary(name, named_gate(name).expect("library gate")));
    }
    let swap = named_gate("SWAP").expect("library gate");
    let id = named_gate("I").expect("library gate");
    let cz = named_gate("CZ").expect("library gate");
    for (a, b) in connectivity.edges(n) {
        let gamma_ab = kron(&model.gamma_qubit(a), &model.gamma_qubit(b));
        let state_ab = kron(&model.thermal_qubit(a), &model.thermal_qubit(b));
        if (model.energies[a] - model.energies[b]).abs() <= 1e-12 {
            gates.push(Gate::unitary(&format!("SWAP_{a}{b}"), swap).on_edge(a, b));
        }
        for (uname, u) in [("I", &id), ("CZ", &cz)] {
            for (qname, q) in [("q25", 0.25), ("q50", 0.5)] {
                let op = q_mixed_channel(u, &state_ab, q)?;
                gates.push(Gate::new(&format!("TH{uname}{qname}_{a}{b}"), op).on_edge(a, b));
            }
        }
        for g in gates.iter().filter(|g| g.edge.is_none() || g.edge == Some((a, b))) {
            if !gibbs_check(&g.op, &gamma_ab)? {
                return Err(Error::NotGibbsPreserving(g.name.clone()));
            }
        }
    }
    GateSet::finite(gates, connectivity)
}

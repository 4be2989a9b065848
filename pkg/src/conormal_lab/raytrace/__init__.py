from .demos import (Demo, demo_glancing, demo_tangency, demo_transverse, get_demo, matches_remark36,
                    remark36_derivative, remark36_family, tangency_exact)
from .flow import (RayConfig, RaySegment, caratheodory_patch, cross_interface_caratheodory,
                   integrate_bicharacteristic, reverse_closure)
from .gbb import GBBNode, GBBTree, branch_gbb, crossing_xi_jump, trace_gbb_tree
from .hamiltonian import (CallableMetric, Elliptic, FlatMetric, Glancing, HamiltonianSpec, Hyperbolic,
                          NormalStretchMetric, PhasePoint, PowerProfile, TwoSidedPowerProfile, ZeroProfile,
                          classify_boundary_point, eval_hamilton_field, eval_p, ptilde)

__all__ = [
    "CallableMetric", "Demo", "Elliptic", "FlatMetric", "GBBNode", "GBBTree", "Glancing", "HamiltonianSpec",
    "Hyperbolic", "NormalStretchMetric", "PhasePoint", "PowerProfile", "RayConfig", "RaySegment",
    "TwoSidedPowerProfile", "ZeroProfile", "branch_gbb", "caratheodory_patch", "classify_boundary_point",
    "cross_interface_caratheodory", "crossing_xi_jump", "demo_glancing", "demo_tangency", "demo_transverse", "eval_hamilton_field",
    "eval_p", "get_demo", "integrate_bicharacteristic", "matches_remark36", "ptilde", "remark36_derivative",
    "remark36_family", "reverse_closure", "tangency_exact", "trace_gbb_tree",
]

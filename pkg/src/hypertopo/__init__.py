"""Topology-aware losses, hyperbolic geometry and structure-aware segmentation metrics."""
from .grid_topology import (BettiPair, betti_numbers, connected_components, euler_characteristic,
                            holes_oracle)
from .manifold import (AdapterParams, ProductPoint, adapter_forward, clamp_to_ball,
                       contrastive_loss, contrastive_loss_grad, poincare_distance,
                       poincare_distance_grad)
from .metrics import (EvalConfig, MetricsRecord, bce_loss, betti_errors, boundary_f1, dice_iou,
                      dice_loss, evaluate_sample)
from .persistence import (DiagramDistanceConfig, bottleneck_pd, diagram_of_mask,
                          h0_superlevel_diagram, pd_distance, wasserstein_pd)
from .soft_euler import (LossWeights, loss_weight_schedule, soft_euler_char, soft_euler_grad,
                         soft_euler_loss, topo_loss, tv_loss)

__version__ = "0.1.0"

__all__ = [
    "AdapterParams", "BettiPair", "DiagramDistanceConfig", "EvalConfig", "LossWeights",
    "MetricsRecord", "ProductPoint", "adapter_forward", "bce_loss", "betti_errors",
    "betti_numbers", "bottleneck_pd", "boundary_f1", "clamp_to_ball", "connected_components",
    "contrastive_loss", "contrastive_loss_grad", "diagram_of_mask", "dice_iou", "dice_loss",
    "euler_characteristic", "evaluate_sample", "h0_superlevel_diagram", "holes_oracle",
    "loss_weight_schedule", "pd_distance", "poincare_distance", "poincare_distance_grad",
    "soft_euler_char", "soft_euler_grad", "soft_euler_loss", "topo_loss", "tv_loss",
    "wasserstein_pd",
]

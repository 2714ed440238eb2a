"""Variable Parzen window affinity graphs for manifold learning and LapRLSC."""

__version__ = "0.1.0"

from .affinity import (AdjustmentKind, AffinityMatrix, ExponentForm, adjusted_affinity,
                       base_affinity, bhattacharyya_distance, build_affinity, laplacian)
from .bandwidth import (BandwidthEstimate, BandwidthKind, ea_perplexity, fpw_mean,
                        fpw_silverman, fpw_user, k7_local, mmm_local, vpw_edge)
from .dataset import (DataMatrix, LabeledSplit, gen_toroidal_helix, gen_uneven_blobs,
                      load_csv, make_split, pca_reduce)
from .diagnostics import cluster_distance_table, random_walk_persistence, select_adjustment
from .errors import DataFormatError, NumericError, ValidationError, VpwError
from .neighborhood import NeighborGraph, NeighborhoodStats, build_knn_graph, neighborhood_stats
from .spectral import Spectrum, eigenmap_embed, eigenvalue_report, smallest_eigenpairs
from .ssl import KernelSpec, LapRlscModel, evaluate_pairwise, fit, gram, predict

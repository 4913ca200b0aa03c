"""Mission planning: risk classes, grid maps, A*, stop points, visit order."""

from .grid import FREE, OCCUPIED, UNKNOWN, GridMap, load_map, save_map
from .risk import RiskRegistry, classify, normalize_label
from .search import astar, octile, path_cost, path_length_m
from .sites import (Detection, HotspotSite, choose_stop_point, distance_matrix, local_search,
                    mark_hotspots, open_tour_length, or_opt, order_sites,
                    stop_point_candidates, two_opt)

__all__ = [
    "FREE", "OCCUPIED", "UNKNOWN", "Detection", "GridMap", "HotspotSite", "RiskRegistry",
    "astar", "choose_stop_point", "classify", "distance_matrix", "load_map", "local_search",
    "mark_hotspots", "normalize_label", "octile", "open_tour_length", "or_opt", "order_sites",
    "path_cost", "path_length_m", "save_map", "stop_point_candidates", "two_opt",
]

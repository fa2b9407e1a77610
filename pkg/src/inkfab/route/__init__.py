"""Grid construction, print-path routing, and design-rule checking."""

from .grid import GridBuildError, RoutingGrid, build_routing_grid
from .engine import (
    Path,
    RoutedLayout,
    RouteParams,
    Router,
    route_all,
)
from .drc import check_design_rules

__all__ = [
    "GridBuildError",
    "RoutingGrid",
    "build_routing_grid",
    "Path",
    "RoutedLayout",
    "RouteParams",
    "Router",
    "route_all",
    "check_design_rules",
]

from netgof.routes.analysis import create_analysis_router as analysis_router
from netgof.routes.simulation import create_simulation_router as simulation_router

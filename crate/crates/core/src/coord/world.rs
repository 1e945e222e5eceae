use std::sync::Arc;

use crate::env::{AccessPointLayout, ControlGraph, EnvironmentMap, NodeId};
use crate::phd::ParticleGrid;
use crate::sensing::{FootprintTable, SensorModel};

use super::CoordError;

/// Static scenario data shared by every robot and the server: map, motion graph,
/// access points, sensor, both particle grids, and per-node footprints on each grid.
#[derive(Debug)]
pub struct World {
    pub map: EnvironmentMap,
    pub graph: ControlGraph,
    pub access_points: AccessPointLayout,
    pub sensor: SensorModel,
    pub robot_grid: Arc<ParticleGrid>,
    pub server_grid: Arc<ParticleGrid>,
    pub robot_footprints: FootprintTable,
    pub server_footprints: FootprintTable,
    visible_areas: Vec<f64>,
}

impl World {
    pub fn new(
        map: EnvironmentMap,
        graph: ControlGraph,
        access_points: AccessPointLayout,
        sensor: SensorModel,
        robot_spacing: f64,
        server_spacing: f64,
    ) -> Result<Self, CoordError> {
        sensor.validate().map_err(|e| CoordError::Invalid(e.to_string()))?;
        if access_points.is_empty() {
            return Err(CoordError::Invalid("at least one access point is required".into()));
        }
        let ratio = robot_spacing / server_spacing;
        if !(ratio >= 1.0 - 1e-9) || (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(CoordError::Invalid(format!(
                "robot grid spacing {robot_spacing} must be an integer multiple of server spacing {server_spacing}"
            )));
        }
        let robot_grid = Arc::new(ParticleGrid::from_map(&map, robot_spacing)?);
        let server_grid = Arc::new(ParticleGrid::from_map(&map, server_spacing)?);
        let visible_areas: Vec<f64> = graph.positions().iter().map(|&q| sensor.visible_area(q, &map)).collect();
        let robot_footprints = FootprintTable::build(&sensor, &robot_grid, &graph, &map, &visible_areas);
        let server_footprints = FootprintTable::build(&sensor, &server_grid, &graph, &map, &visible_areas);
        Ok(Self {
            map,
            graph,
            access_points,
            sensor,
            robot_grid,
            server_grid,
            robot_footprints,
            server_footprints,
            visible_areas,
        })
    }

    pub fn visible_area(&self, node: NodeId) -> f64 {
        self.visible_areas[node]
    }

    /// Fewest motions that reach every node from its nearest access point.
    pub fn max_hops_to_access_point(&self) -> u32 {
        self.access_points.max_hops_to_nearest(&self.graph)
    }

    pub fn hops_to_access_point(&self, node: NodeId) -> u32 {
        self.access_points.hops_to_nearest(&self.graph, node)
    }
}

use crate::env::{EnvironmentMap, Point};

/// Name accepted in scenario files for the built-in floor plan.
pub const BUILTIN_OFFICE: &str = "builtin:office";

const WIDTH: usize = 50;
const HEIGHT: usize = 30;
const CORRIDOR: (usize, usize) = (13, 17);
const ROOM_WALLS: [usize; 4] = [10, 20, 30, 40];

/// A 50 × 30 m office with 1 m cells: a 4 m corridor along the middle and five
/// rooms on each side, each opening onto the corridor through a 2 m door.
pub fn office_map() -> EnvironmentMap {
    let mut obstacle = vec![false; WIDTH * HEIGHT];
    let mut wall = |c: usize, r: usize| obstacle[r * WIDTH + c] = true;
    for c in 0..WIDTH {
        wall(c, 0);
        wall(c, HEIGHT - 1);
    }
    for r in 0..HEIGHT {
        wall(0, r);
        wall(WIDTH - 1, r);
    }
    let (lo, hi) = CORRIDOR;
    for c in 0..WIDTH {
        let door = (c % 10 == 4 || c % 10 == 5) && c > 0 && c < WIDTH - 1;
        if !door {
            wall(c, lo - 1);
            wall(c, hi);
        }
    }
    for &x in &ROOM_WALLS {
        for r in (1..lo - 1).chain(hi + 1..HEIGHT - 1) {
            wall(x, r);
        }
    }
    EnvironmentMap::new(WIDTH, HEIGHT, 1.0, obstacle).expect("static office layout is valid")
}

/// Five access points: one in each corner room and one in the middle of the corridor.
/// With a 10 m range they cover roughly half of the floor.
pub fn office_access_points() -> Vec<Point> {
    vec![
        Point::new(3.5, 3.5),
        Point::new(46.5, 3.5),
        Point::new(3.5, 26.5),
        Point::new(46.5, 26.5),
        Point::new(25.5, 15.5),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::build_graph;

    #[test]
    fn office_is_connected_and_sized() {
        let map = office_map();
        assert_eq!((map.width(), map.height()), (50.0, 30.0));
        let graph = build_graph(&map, 1.0, 2.0).unwrap();
        assert_eq!(graph.len(), map.free_cell_count());
        for ap in office_access_points() {
            assert!(map.is_free(ap));
        }
    }
}

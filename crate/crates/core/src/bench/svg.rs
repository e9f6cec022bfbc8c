use std::fmt::Write;

use thiserror::Error;

use crate::instance::CvrpInstance;
use crate::solution::Solution;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("instance `{0}` has no coordinates (explicit cost matrix); no plot is available")]
pub struct NoCoordinates(pub String);

const WIDTH: f64 = 800.0;

/// Distinct, stable colour for route `i` (golden-angle hue steps).
fn route_colour(i: usize) -> String {
    format!("hsl({:.1},70%,42%)", (i as f64 * 137.508) % 360.0)
}

/// Draws the depot (square), customers (dots) and one closed polyline per
/// nonempty route. The view box covers the coordinate bounding box plus a 5%
/// margin on every side; y grows upwards as in the instance file.
pub fn render_routes_svg(solution: &Solution, instance: &CvrpInstance) -> Result<String, NoCoordinates> {
    let coords: Vec<(f64, f64)> = instance
        .locations
        .iter()
        .map(|l| l.coords)
        .collect::<Option<_>>()
        .ok_or_else(|| NoCoordinates(instance.name.clone()))?;

    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &coords {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let span_x = (x1 - x0).max(1e-9);
    let span_y = (y1 - y0).max(1e-9);
    let (mx, my) = (0.05 * span_x, 0.05 * span_y);
    let (vx, vy) = (span_x + 2.0 * mx, span_y + 2.0 * my);
    let scale = WIDTH / vx;
    let height = vy * scale;
    let px = |(x, y): (f64, f64)| ((x - x0 + mx) * scale, (y1 + my - y) * scale);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.2} {height:.2}">"#
    );
    let _ = writeln!(svg, r#"<title>{} ({:.2})</title>"#, escape(&instance.name), solution.total_cost);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, route) in solution.routes.iter().filter(|r| !r.is_empty()).enumerate() {
        let mut points = String::new();
        for &id in std::iter::once(&0).chain(&route.stops).chain(std::iter::once(&0)) {
            let (x, y) = px(coords[id]);
            let _ = write!(points, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            svg,
            r#"<polyline class="route" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            points.trim_end(),
            route_colour(i)
        );
    }
    for (id, &c) in coords.iter().enumerate().skip(1) {
        let (x, y) = px(c);
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="black"><title>{}</title></circle>"#,
            instance.locations[id].id
        );
    }
    let (dx, dy) = px(coords[0]);
    let _ = writeln!(
        svg,
        r#"<rect class="depot" x="{:.2}" y="{:.2}" width="10" height="10" fill="red" stroke="black"/>"#,
        dx - 5.0,
        dy - 5.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{CostMatrix, Location};

    fn line() -> CvrpInstance {
        CvrpInstance::from_coords("line", &[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0)], &[0.0, 1.0, 1.0], 5.0, None).unwrap()
    }

    #[test]
    fn one_customer_loop_has_three_points() {
        let inst = line();
        let sol = Solution::from_routes(vec![vec![1]], 1, &inst);
        let svg = render_routes_svg(&sol, &inst).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        let v: Vec<&str> = pts.split(' ').collect();
        assert_eq!(v.len(), 3);
        assert_eq!(v[0], v[2]);
    }

    #[test]
    fn empty_solution_shows_only_the_depot() {
        let inst = line();
        let sol = Solution::from_routes(vec![], 2, &inst);
        let svg = render_routes_svg(&sol, &inst).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert_eq!(svg.matches("class=\"depot\"").count(), 1);
    }

    #[test]
    fn margin_is_five_percent() {
        let inst = line();
        let sol = Solution::from_routes(vec![vec![1, 2]], 1, &inst);
        let svg = render_routes_svg(&sol, &inst).unwrap();
        // Span 10 plus 2 * 0.5 margin maps to 800 px, so the depot sits at 800/11 * 0.5.
        let depot_x = 800.0 / 11.0 * 0.5;
        assert!(svg.contains(&format!("{depot_x:.2},")));
    }

    #[test]
    fn explicit_matrix_cannot_be_plotted() {
        let locs = (0..2)
            .map(|id| Location {
                id,
                coords: None,
                demand: id as f64,
            })
            .collect();
        let costs = CostMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let inst = CvrpInstance::new("m", locs, costs, 5.0, None).unwrap();
        let sol = Solution::from_routes(vec![vec![1]], 1, &inst);
        assert!(render_routes_svg(&sol, &inst).is_err());
    }
}

//! Minimal SVG emission for scatter, line, and density plots. Just enough
//! to eyeball figure data; publication styling is out of scope.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 50.0;

pub struct SvgPlot {
    elements: Vec<String>,
    x_range: (f64, f64),
    y_range: (f64, f64),
    title: String,
}

fn finite_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

impl SvgPlot {
    pub fn new(title: &str, xs: &[f64], ys: &[f64]) -> Self {
        Self {
            elements: Vec::new(),
            x_range: finite_range(xs.iter().copied()),
            y_range: finite_range(ys.iter().copied()),
            title: title.to_string(),
        }
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN
            - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0) * (HEIGHT - 2.0 * MARGIN)
    }

    pub fn scatter(&mut self, points: &[(f64, f64)], color: &str) {
        for &(x, y) in points {
            self.elements.push(format!(
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.7"/>"#,
                self.sx(x),
                self.sy(y),
                color
            ));
        }
    }

    pub fn line(&mut self, points: &[(f64, f64)], color: &str) {
        if points.is_empty() {
            return;
        }
        let path: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.sx(x), self.sy(y)))
            .collect();
        self.elements.push(format!(
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            path.join(" "),
            color
        ));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        ));
        out.push('\n');
        out.push_str(&format!(
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        ));
        out.push('\n');
        // axes
        out.push_str(&format!(
            r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
            m = MARGIN,
            b = HEIGHT - MARGIN,
            r = WIDTH - MARGIN
        ));
        out.push('\n');
        out.push_str(&format!(
            r#"<line x1="{m}" y1="{m}" x2="{m}" y2="{b}" stroke="black"/>"#,
            m = MARGIN,
            b = HEIGHT - MARGIN
        ));
        out.push('\n');
        out.push_str(&format!(
            r#"<text x="{}" y="25" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            self.title
        ));
        out.push('\n');
        for el in &self.elements {
            out.push_str(el);
            out.push('\n');
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_svg() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 4.0, 1.0];
        let mut plot = SvgPlot::new("demo", &xs, &ys);
        plot.scatter(&[(0.0, 0.0), (1.0, 4.0)], "steelblue");
        plot.line(&[(0.0, 0.0), (2.0, 1.0)], "grey");
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn degenerate_ranges_do_not_divide_by_zero() {
        let plot = SvgPlot::new("flat", &[1.0, 1.0], &[2.0, 2.0]);
        let svg = plot.render();
        assert!(!svg.contains("NaN"));
    }
}

//! SVG state timeline: exam scores as a step plot per patient, with fired
//! change decisions as markers.

use std::fmt::Write as _;

use moodsense_core::changedetect::ChangeDecision;
use moodsense_core::ingest::ExamRecord;
use moodsense_core::timeline::Epoch;

const WIDTH: f64 = 900.0;
const LEFT: f64 = 110.0;
const RIGHT: f64 = 20.0;
const PANEL: f64 = 130.0;
const PLOT_TOP: f64 = 22.0;
const PLOT_HEIGHT: f64 = 84.0;

pub struct TimelinePanel {
    pub patient_id: String,
    pub exams: Vec<ExamRecord>,
    pub decisions: Vec<ChangeDecision>,
    /// Inclusive day range of the x axis.
    pub first_day: Epoch,
    pub last_day: Epoch,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Axis {
    first: i32,
    span: f64,
}

impl Axis {
    fn x(&self, day: Epoch) -> f64 {
        LEFT + (f64::from(day.0 - self.first) / self.span) * (WIDTH - LEFT - RIGHT)
    }
}

fn y(top: f64, score: i32) -> f64 {
    top + PLOT_TOP + (3.0 - f64::from(score.clamp(-3, 3))) / 6.0 * PLOT_HEIGHT
}

/// Renders the panels top to bottom. Output depends only on the inputs.
pub fn render_timeline(panels: &[TimelinePanel]) -> String {
    let height = PANEL * panels.len().max(1) as f64 + 10.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{height}" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        let top = i as f64 * PANEL + 5.0;
        let first = p.first_day.min(p.exams.first().map_or(p.first_day, |e| e.date));
        let last = p.last_day.max(p.exams.last().map_or(p.last_day, |e| e.date));
        let axis = Axis { first: first.0, span: f64::from((last.0 - first.0).max(1) + 1) };
        let end = last.offset(1);
        let _ = writeln!(s, r#"<g id="{}">"#, escape(&p.patient_id));
        let _ = writeln!(s, r#"<text x="8" y="{:.2}">{}</text>"#, y(top, 0) + 4.0, escape(&p.patient_id));
        for score in [-3, 0, 3] {
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{score:+}</text>"##,
                LEFT,
                y(top, score),
                WIDTH - RIGHT,
                y(top, score),
                LEFT - 6.0,
                y(top, score) + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT,
            top + PANEL - 8.0,
            first,
            WIDTH - RIGHT,
            top + PANEL - 8.0,
            last
        );

        let mut points = Vec::new();
        for (k, e) in p.exams.iter().enumerate() {
            let next = p.exams.get(k + 1).map_or(end, |n| n.date);
            points.push((axis.x(e.date), y(top, e.score)));
            points.push((axis.x(next), y(top, e.score)));
        }
        let path: Vec<String> = points.iter().map(|(px, py)| format!("{px:.2},{py:.2}")).collect();
        let _ = writeln!(
            s,
            r##"<polyline class="state" fill="none" stroke="#1f4e9c" stroke-width="2" points="{}"/>"##,
            path.join(" ")
        );
        for e in &p.exams {
            let _ = writeln!(
                s,
                r##"<circle class="exam" cx="{:.2}" cy="{:.2}" r="3" fill="#1f4e9c"/>"##,
                axis.x(e.date),
                y(top, e.score)
            );
        }
        for d in p.decisions.iter().filter(|d| d.fired) {
            let _ = writeln!(
                s,
                r##"<rect class="change" x="{:.2}" y="{:.2}" width="3" height="8" fill="#c0392b"><title>{} {} score {:.3}</title></rect>"##,
                axis.x(d.epoch),
                top + 6.0,
                d.epoch,
                escape(&d.modality),
                d.normalized_score
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

//! Memory-profile chart: one band per job run stacked per round, killed runs
//! dotted, and a dashed line at the budget.

use std::fmt::Write as _;

use kvsched::{Instance, JobId, Timeline};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 48.0;

/// One uninterrupted stretch of a job in the batch.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Run {
    job: JobId,
    start: u64,
    /// Memory held in each round of the run.
    memory: Vec<u64>,
    killed: bool,
}

fn runs(tl: &Timeline, inst: &Instance) -> Vec<Run> {
    let mut open: Vec<Option<Run>> = vec![None; inst.n()];
    let mut done = Vec::new();
    for (t, round) in tl.rounds.iter().enumerate() {
        let t = t as u64;
        let mut present = vec![false; inst.n()];
        for a in round {
            present[a.id] = true;
            let restarted = a.progress == 0 && open[a.id].is_some();
            if restarted {
                let mut r = open[a.id].take().unwrap();
                r.killed = true;
                done.push(r);
            }
            let run = open[a.id].get_or_insert_with(|| Run {
                job: a.id,
                start: t,
                memory: Vec::new(),
                killed: false,
            });
            run.memory.push(inst.prompt_len + a.progress + 1);
        }
        for (j, slot) in open.iter_mut().enumerate() {
            if !present[j] {
                if let Some(mut r) = slot.take() {
                    r.killed = r.memory.len() as u64 != inst.response_len(j);
                    done.push(r);
                }
            }
        }
    }
    for (j, slot) in open.into_iter().enumerate() {
        if let Some(mut r) = slot {
            r.killed = r.memory.len() as u64 != inst.response_len(j);
            done.push(r);
        }
    }
    done.sort_by_key(|r| (r.start, r.job));
    done
}

fn color(job: JobId) -> String {
    // Golden-angle hue steps keep neighbouring ids apart.
    let hue = (job as f64 * 137.508) % 360.0;
    format!("hsl({hue:.1},65%,55%)")
}

fn nice_step(span: f64, ticks: f64) -> f64 {
    let raw = (span / ticks).max(1.0);
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

pub fn render_svg(tl: &Timeline, inst: &Instance, title: &str) -> String {
    let rounds = tl.rounds.len() as u64;
    let x_max = rounds.max(1) as f64;
    let y_max = inst.memory_budget as f64 * 1.05;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |t: f64| LEFT + t / x_max * plot_w;
    let y = |m: f64| TOP + plot_h - m / y_max * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    svg.push_str(
        r##"<defs><pattern id="dots" width="4" height="4" patternUnits="userSpaceOnUse"><circle cx="2" cy="2" r="0.9" fill="#222"/></pattern></defs>
"##,
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{LEFT}" y="16">{}</text>"#, escape(title));

    if rounds > 0 {
        // Stack runs in order of start so older runs sit lower.
        let all = runs(tl, inst);
        let mut base = vec![0u64; rounds as usize];
        let mut bands = String::new();
        for run in &all {
            let mut top = Vec::with_capacity(run.memory.len());
            let mut bottom = Vec::with_capacity(run.memory.len());
            for (d, &m) in run.memory.iter().enumerate() {
                let t = (run.start as usize) + d;
                bottom.push(base[t]);
                top.push(base[t] + m);
                base[t] += m;
            }
            let mut path = String::new();
            for (d, &b) in bottom.iter().enumerate() {
                let t = (run.start + d as u64) as f64;
                let cmd = if d == 0 { 'M' } else { 'L' };
                let _ = write!(path, "{cmd}{:.2},{:.2} L{:.2},{:.2} ", x(t), y(b as f64), x(t + 1.0), y(b as f64));
            }
            for (d, &tp) in top.iter().enumerate().rev() {
                let t = (run.start + d as u64) as f64;
                let _ = write!(path, "L{:.2},{:.2} L{:.2},{:.2} ", x(t + 1.0), y(tp as f64), x(t), y(tp as f64));
            }
            path.push('Z');
            let fill = color(run.job);
            if run.killed {
                let _ = writeln!(
                    bands,
                    r#"<g><title>job {} killed</title><path d="{path}" fill="{fill}" fill-opacity="0.45"/><path d="{path}" fill="url(#dots)"/></g>"#,
                    run.job
                );
            } else {
                let _ = writeln!(
                    bands,
                    r#"<path d="{path}" fill="{fill}"><title>job {}</title></path>"#,
                    run.job
                );
            }
        }
        svg.push_str(&bands);
        let ym = y(inst.memory_budget as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{ym:.2}" x2="{:.2}" y2="{ym:.2}" stroke="#c00" stroke-dasharray="6 4"/><text x="{:.2}" y="{:.2}" fill="#c00" text-anchor="end">M = {}</text>"##,
            LEFT + plot_w,
            LEFT + plot_w,
            ym - 4.0,
            inst.memory_budget
        );
    }

    // Axes.
    let (x0, y0) = (LEFT, TOP + plot_h);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0},{TOP} L{x0},{y0} L{:.2},{y0}" fill="none" stroke="black"/>"#,
        LEFT + plot_w
    );
    let xs = nice_step(x_max, 8.0);
    let mut t = 0.0;
    while t <= x_max + 1e-9 {
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{y0}" x2="{0:.2}" y2="{1}" stroke="black"/><text x="{0:.2}" y="{2}" text-anchor="middle">{3}</text>"#,
            x(t),
            y0 + 4.0,
            y0 + 18.0,
            t as u64
        );
        t += xs;
    }
    let ys = nice_step(y_max, 6.0);
    let mut m = 0.0;
    while m <= y_max + 1e-9 {
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{1:.2}" x2="{2}" y2="{1:.2}" stroke="black"/><text x="{3}" y="{4:.2}" text-anchor="end">{5}</text>"#,
            x0 - 4.0,
            y(m),
            x0,
            x0 - 6.0,
            y(m) + 4.0,
            m as u64
        );
        m += ys;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">round</text><text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">memory</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 8.0,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use kvsched::rational::from_u64;
    use kvsched::schedulers;

    #[test]
    fn runs_split_at_kills() {
        // s = 3, M = 20, o = 6: slices 1, 2, 4 kill the job, 8 finishes it.
        let inst = Instance::new(3, 20, &[6]).unwrap();
        let tl = schedulers::gsa(&inst, &from_u64(2), None).unwrap();
        let r = runs(&tl, &inst);
        let lens: Vec<usize> = r.iter().map(|r| r.memory.len()).collect();
        assert_eq!(lens, vec![1, 2, 4, 6]);
        assert_eq!(r.iter().filter(|r| r.killed).count(), 3);
        assert_eq!(r[3].memory, vec![4, 5, 6, 7, 8, 9]);
    }

    #[test]
    fn staircase_has_one_band_per_job() {
        let inst = Instance::new(0, 15, &[5; 15]).unwrap();
        let tl = schedulers::sps(&inst, 5, 5).unwrap();
        let svg = render_svg(&tl, &inst, "sps");
        assert_eq!(svg.matches("<title>job ").count(), 15);
        assert!(!svg.contains("killed"));
        assert!(svg.contains("M = 15"));
    }

    #[test]
    fn empty_timeline_draws_axes_only() {
        let inst = Instance::new(0, 4, &[1]).unwrap();
        let svg = render_svg(&Timeline::with_jobs(1), &inst, "empty");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("round"));
        assert!(!svg.contains("<title>"));
        assert!(!svg.contains("M = "));
    }
}

use super::{gradients, min_eigenvalue, FlowConfig, GrayFrame, TrackedPoint};

/// Half-size of the structure-tensor block (5x5).
const BLOCK_RADIUS: usize = 2;

/// Separable box sum with radius `r`; out-of-range taps are skipped.
fn box_sum(src: &[f32], width: usize, height: usize, r: usize) -> Vec<f32> {
    let mut tmp = vec![0.0f32; src.len()];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        let out = &mut tmp[y * width..(y + 1) * width];
        for (x, o) in out.iter_mut().enumerate() {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(width - 1);
            *o = row[lo..=hi].iter().sum();
        }
    }
    let mut dst = vec![0.0f32; src.len()];
    for y in 0..height {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(height - 1);
        for yy in lo..=hi {
            let src_row = &tmp[yy * width..(yy + 1) * width];
            let dst_row = &mut dst[y * width..(y + 1) * width];
            for (d, s) in dst_row.iter_mut().zip(src_row) {
                *d += *s;
            }
        }
    }
    dst
}

/// Minimum-eigenvalue (Shi-Tomasi) corners with greedy non-maximum
/// suppression, strongest first.
///
/// A featureless frame yields an empty list.
pub fn seed_features(frame: &GrayFrame, config: &FlowConfig) -> Vec<TrackedPoint> {
    let (w, h) = (frame.width(), frame.height());
    let img = frame.to_f32();
    let g = gradients(&img, w, h);
    let xx: Vec<f32> = g.gx.iter().map(|v| v * v).collect();
    let xy: Vec<f32> = g.gx.iter().zip(&g.gy).map(|(a, b)| a * b).collect();
    let yy: Vec<f32> = g.gy.iter().map(|v| v * v).collect();
    let sxx = box_sum(&xx, w, h, BLOCK_RADIUS);
    let sxy = box_sum(&xy, w, h, BLOCK_RADIUS);
    let syy = box_sum(&yy, w, h, BLOCK_RADIUS);
    let area = ((2 * BLOCK_RADIUS + 1) * (2 * BLOCK_RADIUS + 1)) as f64;

    let score: Vec<f32> = (0..w * h)
        .map(|i| (min_eigenvalue(sxx[i] as f64, sxy[i] as f64, syy[i] as f64) / area) as f32)
        .collect();

    let margin = BLOCK_RADIUS + 1;
    let mut candidates = Vec::new();
    for y in margin..h - margin {
        for x in margin..w - margin {
            let s = score[y * w + x];
            if (s as f64) < config.min_eigen {
                continue;
            }
            let is_peak = (y - 1..=y + 1)
                .flat_map(|yy| (x - 1..=x + 1).map(move |xx| (xx, yy)))
                .all(|(xx, yy)| score[yy * w + xx] <= s);
            if is_peak {
                candidates.push((s, x, y));
            }
        }
    }
    // Stable order: strongest first, then raster order.
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));

    let min_d2 = config.min_distance * config.min_distance;
    let mut accepted: Vec<TrackedPoint> = Vec::new();
    for (_, x, y) in candidates {
        if accepted.len() >= config.max_features {
            break;
        }
        let (px, py) = (x as f64, y as f64);
        let clear = accepted.iter().all(|p| {
            let dx = p.position[0] - px;
            let dy = p.position[1] - py;
            dx * dx + dy * dy >= min_d2
        });
        if clear {
            accepted.push(TrackedPoint::at(px, py));
        }
    }
    accepted
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_from_fn(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> GrayFrame {
        let pixels = (0..w * h).map(|i| f(i % w, i / w)).collect();
        GrayFrame::new(w, h, pixels, 0.0).unwrap()
    }

    #[test]
    fn uniform_frame_has_no_features() {
        let frame = GrayFrame::filled(64, 48, 128, 0.0).unwrap();
        assert!(seed_features(&frame, &FlowConfig::default()).is_empty());
    }

    #[test]
    fn square_features_sit_on_its_boundary() {
        let (x0, y0, x1, y1) = (30usize, 25usize, 70usize, 60usize);
        let frame = frame_from_fn(100, 90, |x, y| {
            if (x0..x1).contains(&x) && (y0..y1).contains(&y) {
                230
            } else {
                20
            }
        });
        let pts = seed_features(&frame, &FlowConfig::default());
        assert!(!pts.is_empty());
        // Distance to the square's outline (edges between pixel x0-1|x0 etc.)
        let (bx0, by0, bx1, by1) = (
            x0 as f64 - 0.5,
            y0 as f64 - 0.5,
            x1 as f64 - 0.5,
            y1 as f64 - 0.5,
        );
        let near = pts
            .iter()
            .filter(|p| {
                let [x, y] = p.position;
                let inside_x = (bx0..=bx1).contains(&x);
                let inside_y = (by0..=by1).contains(&y);
                let dist_v = if inside_y {
                    (x - bx0).abs().min((x - bx1).abs())
                } else {
                    f64::INFINITY
                };
                let dist_h = if inside_x {
                    (y - by0).abs().min((y - by1).abs())
                } else {
                    f64::INFINITY
                };
                let corner = [(bx0, by0), (bx0, by1), (bx1, by0), (bx1, by1)]
                    .iter()
                    .map(|(cx, cy)| (x - cx).hypot(y - cy))
                    .fold(f64::INFINITY, f64::min);
                dist_v.min(dist_h).min(corner) <= 2.0
            })
            .count();
        assert!(
            near * 10 >= pts.len() * 9,
            "{near} of {} near boundary",
            pts.len()
        );
    }

    #[test]
    fn checkerboard_corners_respect_suppression() {
        let frame = frame_from_fn(160, 160, |x, y| {
            if ((x / 20) + (y / 20)) % 2 == 0 {
                220
            } else {
                30
            }
        });
        let config = FlowConfig::default();
        let pts = seed_features(&frame, &config);
        assert!(pts.len() >= 20, "only {} points", pts.len());
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                let d = (a.position[0] - b.position[0]).hypot(a.position[1] - b.position[1]);
                assert!(d >= config.min_distance, "points {a:?} and {b:?} at {d}");
            }
        }
    }

    #[test]
    fn respects_max_features() {
        let frame = frame_from_fn(160, 160, |x, y| {
            if ((x / 8) + (y / 8)) % 2 == 0 {
                220
            } else {
                30
            }
        });
        let config = FlowConfig {
            max_features: 7,
            ..FlowConfig::default()
        };
        let pts = seed_features(&frame, &config);
        assert_eq!(pts.len(), 7);
        assert!(pts.iter().all(|p| p.valid && p.displacement == [0.0, 0.0]));
    }
}

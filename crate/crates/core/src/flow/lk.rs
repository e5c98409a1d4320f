use super::{bilinear, gradients, min_eigenvalue, FlowConfig, FlowError, GrayFrame, TrackedPoint};

const CONVERGED_PX: f64 = 0.01;

/// One Lucas-Kanade tracking step from `prev` to `cur`.
///
/// Each valid point is refined iteratively over an `lk_window`-square
/// patch. Spatial gradients come from `prev`; the residual is the
/// temporal difference between the `prev` patch and the shifted `cur`
/// patch. Returned points sit at their new position in `cur`, carry the
/// step's displacement, and are marked invalid when the gradient matrix
/// is near-singular or the point leaves the frame. Invalid input points
/// pass through unchanged.
pub fn lk_step(
    prev: &GrayFrame,
    cur: &GrayFrame,
    points: &[TrackedPoint],
    config: &FlowConfig,
) -> Result<Vec<TrackedPoint>, FlowError> {
    prev.same_size(cur)?;
    let (w, h) = (prev.width(), prev.height());
    let prev_img = prev.to_f32();
    let cur_img = cur.to_f32();
    let grad = gradients(&prev_img, w, h);
    let half = (config.lk_window / 2) as i64;
    let offsets: Vec<(f64, f64)> = (-half..=half)
        .flat_map(|j| (-half..=half).map(move |i| (i as f64, j as f64)))
        .collect();
    let n = offsets.len() as f64;
    let max_x = (w - 1) as f64;
    let max_y = (h - 1) as f64;

    let mut template = vec![0.0f32; offsets.len()];
    let mut gx = vec![0.0f32; offsets.len()];
    let mut gy = vec![0.0f32; offsets.len()];

    let mut out = Vec::with_capacity(points.len());
    for point in points {
        if !point.valid {
            out.push(*point);
            continue;
        }
        let [px, py] = point.position;
        let invalid = TrackedPoint {
            position: point.position,
            displacement: [0.0, 0.0],
            valid: false,
        };
        if !(0.0..=max_x).contains(&px) || !(0.0..=max_y).contains(&py) {
            out.push(invalid);
            continue;
        }

        let (mut gxx, mut gxy, mut gyy) = (0.0f64, 0.0f64, 0.0f64);
        for (k, &(ox, oy)) in offsets.iter().enumerate() {
            let (sx, sy) = (px + ox, py + oy);
            template[k] = bilinear(&prev_img, w, h, sx, sy);
            gx[k] = bilinear(&grad.gx, w, h, sx, sy);
            gy[k] = bilinear(&grad.gy, w, h, sx, sy);
            gxx += (gx[k] * gx[k]) as f64;
            gxy += (gx[k] * gy[k]) as f64;
            gyy += (gy[k] * gy[k]) as f64;
        }
        if min_eigenvalue(gxx / n, gxy / n, gyy / n) < config.lk_min_eigen {
            out.push(invalid);
            continue;
        }
        let det = gxx * gyy - gxy * gxy;

        let (mut dx, mut dy) = (0.0f64, 0.0f64);
        for _ in 0..config.lk_iterations {
            let (mut bx, mut by) = (0.0f64, 0.0f64);
            for (k, &(ox, oy)) in offsets.iter().enumerate() {
                let moved = bilinear(&cur_img, w, h, px + dx + ox, py + dy + oy);
                let err = (template[k] - moved) as f64;
                bx += err * gx[k] as f64;
                by += err * gy[k] as f64;
            }
            let ux = (gyy * bx - gxy * by) / det;
            let uy = (gxx * by - gxy * bx) / det;
            dx += ux;
            dy += uy;
            if ux.hypot(uy) < CONVERGED_PX {
                break;
            }
        }

        let (nx, ny) = (px + dx, py + dy);
        if !dx.is_finite()
            || !dy.is_finite()
            || !(0.0..=max_x).contains(&nx)
            || !(0.0..=max_y).contains(&ny)
        {
            out.push(invalid);
            continue;
        }
        out.push(TrackedPoint {
            position: [nx, ny],
            displacement: [dx, dy],
            valid: true,
        });
    }
    Ok(out)
}

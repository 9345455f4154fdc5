//! Frame detection on the accumulator's combined plane.
//!
//! The flickered 13-pixel border is engineered to be the dominant structure
//! in the accumulator, so classical segmentation is enough: Otsu threshold,
//! 5x5 morphological close, largest connected component, then a Hough line
//! transform over the component's outer contour. The four edge lines are
//! refined by a total-least-squares fit to nearby contour pixels and
//! intersected into sub-pixel corners.

use super::accumulate::AccumulatorImage;
use crate::frame::Plane;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum QuadError {
    #[error("combined plane is constant, nothing to detect")]
    EmptyAccumulator,
    #[error("fewer than four qualifying border lines")]
    NotEnoughLines,
    #[error("line intersections are degenerate or non-convex")]
    DegenerateCorners,
}

/// Four sub-pixel corners in recording space, ordered TL, TR, BR, BL.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub corners: [[f64; 2]; 4],
}

impl Quad {
    /// Signed area via the shoelace formula (positive for TL,TR,BR,BL order
    /// in image coordinates).
    pub fn area(&self) -> f64 {
        let c = &self.corners;
        let mut s = 0.0;
        for i in 0..4 {
            let j = (i + 1) % 4;
            s += c[i][0] * c[j][1] - c[j][0] * c[i][1];
        }
        s / 2.0
    }

    pub fn is_convex(&self) -> bool {
        let c = &self.corners;
        let mut signs = [0.0f64; 4];
        for i in 0..4 {
            let p0 = c[i];
            let p1 = c[(i + 1) % 4];
            let p2 = c[(i + 2) % 4];
            let cross = (p1[0] - p0[0]) * (p2[1] - p1[1]) - (p1[1] - p0[1]) * (p2[0] - p1[0]);
            signs[i] = cross;
        }
        signs.iter().all(|&s| s > 0.0) || signs.iter().all(|&s| s < 0.0)
    }
}

/// Otsu's threshold over a 256-bin histogram of the plane's value range.
/// Returns `None` for a constant plane.
pub fn otsu_threshold(plane: &Plane) -> Option<f32> {
    let mut min = f32::INFINITY;
    let mut max = f32::NEG_INFINITY;
    for &v in plane.data() {
        min = min.min(v);
        max = max.max(v);
    }
    if !(max > min) {
        return None;
    }
    let mut hist = [0u64; 256];
    let scale = 255.0 / (max - min);
    for &v in plane.data() {
        let bin = (((v - min) * scale) as usize).min(255);
        hist[bin] += 1;
    }

    let total: u64 = plane.data().len() as u64;
    let total_sum: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &n)| i as f64 * n as f64)
        .sum();
    let mut best_bin = 0usize;
    let mut best_var = -1.0f64;
    let mut w0 = 0u64;
    let mut sum0 = 0.0f64;
    for (bin, &n) in hist.iter().enumerate() {
        w0 += n;
        if w0 == 0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0 {
            break;
        }
        sum0 += bin as f64 * n as f64;
        let m0 = sum0 / w0 as f64;
        let m1 = (total_sum - sum0) / w1 as f64;
        let var = w0 as f64 * w1 as f64 * (m0 - m1) * (m0 - m1);
        if var > best_var {
            best_var = var;
            best_bin = bin;
        }
    }
    Some(min + (best_bin as f32 + 0.5) / scale)
}

/// Binary image stored one byte per pixel.
struct Binary {
    w: usize,
    h: usize,
    data: Vec<u8>,
}

/// 5x5 morphological close (dilate then erode), separable passes.
fn close_5x5(bin: &mut Binary) {
    let run = |src: &[u8], w: usize, h: usize, dilate: bool| -> Vec<u8> {
        let mut tmp = vec![0u8; w * h];
        // horizontal window of 5
        for y in 0..h {
            let row = &src[y * w..(y + 1) * w];
            let out = &mut tmp[y * w..(y + 1) * w];
            for x in 0..w {
                let lo = x.saturating_sub(2);
                let hi = (x + 2).min(w - 1);
                let any = row[lo..=hi].iter().any(|&v| v != 0);
                let all = row[lo..=hi].iter().all(|&v| v != 0);
                out[x] = if dilate { any as u8 } else { all as u8 };
            }
        }
        // vertical window of 5
        let mut dst = vec![0u8; w * h];
        for y in 0..h {
            let lo = y.saturating_sub(2);
            let hi = (y + 2).min(h - 1);
            for x in 0..w {
                let mut any = false;
                let mut all = true;
                for yy in lo..=hi {
                    let v = tmp[yy * w + x] != 0;
                    any |= v;
                    all &= v;
                }
                dst[y * w + x] = if dilate { any as u8 } else { all as u8 };
            }
        }
        dst
    };
    bin.data = run(&bin.data, bin.w, bin.h, true);
    bin.data = run(&bin.data, bin.w, bin.h, false);
}

/// Largest 8-connected foreground component; returns its pixel mask.
fn largest_component(bin: &Binary) -> Option<Vec<u8>> {
    let (w, h) = (bin.w, bin.h);
    let mut label = vec![0u32; w * h];
    let mut next = 1u32;
    let mut best = (0u32, 0usize);
    let mut stack = Vec::new();

    for start in 0..w * h {
        if bin.data[start] == 0 || label[start] != 0 {
            continue;
        }
        let id = next;
        next += 1;
        let mut count = 0usize;
        stack.push(start);
        label[start] = id;
        while let Some(i) = stack.pop() {
            count += 1;
            let x = i % w;
            let y = i / w;
            let x0 = x.saturating_sub(1);
            let x1 = (x + 1).min(w - 1);
            let y0 = y.saturating_sub(1);
            let y1 = (y + 1).min(h - 1);
            for yy in y0..=y1 {
                for xx in x0..=x1 {
                    let j = yy * w + xx;
                    if bin.data[j] != 0 && label[j] == 0 {
                        label[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
        if count > best.1 {
            best = (id, count);
        }
    }
    if best.1 == 0 {
        return None;
    }
    Some(label.iter().map(|&l| (l == best.0) as u8).collect())
}

/// Pixels of the component that touch the outside region (background
/// flood-filled from the image edges). Inner hole boundaries are excluded.
fn outer_contour(mask: &[u8], w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut outside = vec![0u8; w * h];
    let mut stack = Vec::new();
    let push = |i: usize, outside: &mut Vec<u8>, stack: &mut Vec<usize>| {
        if mask[i] == 0 && outside[i] == 0 {
            outside[i] = 1;
            stack.push(i);
        }
    };
    for x in 0..w {
        push(x, &mut outside, &mut stack);
        push((h - 1) * w + x, &mut outside, &mut stack);
    }
    for y in 0..h {
        push(y * w, &mut outside, &mut stack);
        push(y * w + w - 1, &mut outside, &mut stack);
    }
    while let Some(i) = stack.pop() {
        let x = i % w;
        let y = i / w;
        if x > 0 {
            push(i - 1, &mut outside, &mut stack);
        }
        if x + 1 < w {
            push(i + 1, &mut outside, &mut stack);
        }
        if y > 0 {
            push(i - w, &mut outside, &mut stack);
        }
        if y + 1 < h {
            push(i + w, &mut outside, &mut stack);
        }
    }

    let mut contour = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if mask[i] == 0 {
                continue;
            }
            let on_edge = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            let touches_outside = (x > 0 && outside[i - 1] != 0)
                || (x + 1 < w && outside[i + 1] != 0)
                || (y > 0 && outside[i - w] != 0)
                || (y + 1 < h && outside[i + w] != 0);
            if on_edge || touches_outside {
                contour.push((x, y));
            }
        }
    }
    contour
}

/// A line in Hessian normal form: x cos(theta) + y sin(theta) = rho.
#[derive(Debug, Clone, Copy)]
struct PolarLine {
    theta: f64,
    rho: f64,
    votes: u32,
}

/// Hough transform over contour points, 1-degree x 1-pixel bins.
fn hough_lines(points: &[(usize, usize)], w: usize, h: usize) -> Vec<PolarLine> {
    const ANGLES: usize = 180;
    let rmax = ((w * w + h * h) as f64).sqrt().ceil() as isize;
    let rbins = (2 * rmax + 1) as usize;
    let trig: Vec<(f64, f64)> = (0..ANGLES)
        .map(|a| (a as f64).to_radians())
        .map(|t| (t.cos(), t.sin()))
        .collect();

    let mut acc = vec![0u32; ANGLES * rbins];
    for &(x, y) in points {
        for (a, &(c, s)) in trig.iter().enumerate() {
            let r = (x as f64 * c + y as f64 * s).round() as isize + rmax;
            acc[a * rbins + r as usize] += 1;
        }
    }

    // Peak extraction with suppression of near-duplicates (within 10 degrees
    // and 30 px, including the theta wrap where rho flips sign).
    let mut peaks: Vec<PolarLine> = Vec::new();
    let mut candidates: Vec<(u32, usize, usize)> = acc
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v >= 20)
        .map(|(i, &v)| (v, i / rbins, i % rbins))
        .collect();
    candidates.sort_unstable_by(|a, b| b.0.cmp(&a.0));

    'next: for (votes, a, r) in candidates {
        if peaks.len() >= 16 {
            break;
        }
        let theta = a as f64;
        let rho = (r as isize - rmax) as f64;
        for p in &peaks {
            let (dt, drho) = angular_distance(theta, rho, p.theta.to_degrees(), p.rho);
            if dt <= 10.0 && drho <= 30.0 {
                continue 'next;
            }
        }
        peaks.push(PolarLine {
            theta: theta.to_radians(),
            rho,
            votes,
        });
    }
    peaks
}

/// Distance between two polar lines accounting for the (theta+180, -rho)
/// equivalence. Angles in degrees.
fn angular_distance(t1: f64, r1: f64, t2: f64, r2: f64) -> (f64, f64) {
    let direct = ((t1 - t2).abs(), (r1 - r2).abs());
    let wrapped = (180.0 - (t1 - t2).abs(), (r1 + r2).abs());
    if wrapped.0 < direct.0 {
        wrapped
    } else {
        direct
    }
}

/// Total-least-squares line fit through contour points near a seed line;
/// falls back to the seed when too few points qualify.
fn refine_line(seed: PolarLine, points: &[(usize, usize)]) -> PolarLine {
    let (c, s) = (seed.theta.cos(), seed.theta.sin());
    let near: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| (x as f64 * c + y as f64 * s - seed.rho).abs() <= 2.0)
        .map(|&(x, y)| (x as f64, y as f64))
        .collect();
    if near.len() < 10 {
        return seed;
    }
    let n = near.len() as f64;
    let mx = near.iter().map(|p| p.0).sum::<f64>() / n;
    let my = near.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &near {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    // Normal of the best-fit line = eigenvector of the smaller eigenvalue.
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let lam = 0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt());
    let (mut nx, mut ny) = if sxy.abs() > 1e-12 {
        (lam - syy, sxy)
    } else if sxx <= syy {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let norm = (nx * nx + ny * ny).sqrt();
    if norm < 1e-12 {
        return seed;
    }
    nx /= norm;
    ny /= norm;
    // Keep the normal on the seed's side so rho stays comparable.
    if nx * c + ny * s < 0.0 {
        nx = -nx;
        ny = -ny;
    }
    PolarLine {
        theta: ny.atan2(nx),
        rho: nx * mx + ny * my,
        votes: seed.votes,
    }
}

fn intersect(l1: PolarLine, l2: PolarLine) -> Option<[f64; 2]> {
    let (c1, s1) = (l1.theta.cos(), l1.theta.sin());
    let (c2, s2) = (l2.theta.cos(), l2.theta.sin());
    let det = c1 * s2 - s1 * c2;
    if det.abs() < 1e-9 {
        return None;
    }
    Some([
        (l1.rho * s2 - l2.rho * s1) / det,
        (c1 * l2.rho - c2 * l1.rho) / det,
    ])
}

/// Detects the flickered frame border and returns its four corners.
pub fn detect_frame_quad(acc: &AccumulatorImage) -> Result<Quad, QuadError> {
    detect_quad_in_plane(&acc.combined)
}

pub fn detect_quad_in_plane(plane: &Plane) -> Result<Quad, QuadError> {
    let (w, h) = (plane.width(), plane.height());
    let threshold = otsu_threshold(plane).ok_or(QuadError::EmptyAccumulator)?;
    let mut bin = Binary {
        w,
        h,
        data: plane.data().iter().map(|&v| (v > threshold) as u8).collect(),
    };
    close_5x5(&mut bin);
    let mask = largest_component(&bin).ok_or(QuadError::EmptyAccumulator)?;
    let contour = outer_contour(&mask, w, h);
    if contour.len() < 40 {
        return Err(QuadError::NotEnoughLines);
    }

    let lines = hough_lines(&contour, w, h);
    // A border seen at up to 40 degrees of yaw/pitch keeps its edges clearly
    // closer to one image axis than the other, so split candidates into
    // near-horizontal and near-vertical.
    let mut horizontal = Vec::new();
    let mut vertical = Vec::new();
    for l in lines {
        if l.theta.sin().abs() >= std::f64::consts::FRAC_1_SQRT_2 {
            horizontal.push(l);
        } else {
            vertical.push(l);
        }
    }
    // Weak slanted lines clipping a corner can sit outside the true edges,
    // so only lines with a substantial share of their class's best vote
    // count compete for the extremes.
    for class in [&mut horizontal, &mut vertical] {
        let best = class.iter().map(|l| l.votes).max().unwrap_or(0);
        class.retain(|l| l.votes * 4 >= best);
    }
    if horizontal.len() < 2 || vertical.len() < 2 {
        return Err(QuadError::NotEnoughLines);
    }

    // The outer contour's extreme lines are the border edges; anything the
    // contour picked up between them (content structure fused into the
    // component) lies strictly inside.
    let y_at = |l: &PolarLine, x: f64| (l.rho - x * l.theta.cos()) / l.theta.sin();
    let x_at = |l: &PolarLine, y: f64| (l.rho - y * l.theta.sin()) / l.theta.cos();
    let midx = w as f64 / 2.0;
    let midy = h as f64 / 2.0;
    let top = horizontal
        .iter()
        .copied()
        .min_by(|a, b| y_at(a, midx).total_cmp(&y_at(b, midx)))
        .unwrap();
    let bottom = horizontal
        .iter()
        .copied()
        .max_by(|a, b| y_at(a, midx).total_cmp(&y_at(b, midx)))
        .unwrap();
    let left = vertical
        .iter()
        .copied()
        .min_by(|a, b| x_at(a, midy).total_cmp(&x_at(b, midy)))
        .unwrap();
    let right = vertical
        .iter()
        .copied()
        .max_by(|a, b| x_at(a, midy).total_cmp(&x_at(b, midy)))
        .unwrap();

    let top = refine_line(top, &contour);
    let bottom = refine_line(bottom, &contour);
    let left = refine_line(left, &contour);
    let right = refine_line(right, &contour);

    let tl = intersect(top, left).ok_or(QuadError::DegenerateCorners)?;
    let tr = intersect(top, right).ok_or(QuadError::DegenerateCorners)?;
    let br = intersect(bottom, right).ok_or(QuadError::DegenerateCorners)?;
    let bl = intersect(bottom, left).ok_or(QuadError::DegenerateCorners)?;
    let quad = Quad {
        corners: [tl, tr, br, bl],
    };
    if !quad.is_convex() || quad.area().abs() < 10_000.0 {
        return Err(QuadError::DegenerateCorners);
    }
    Ok(quad)
}

use super::WindowPair;
use crate::error::{Error, Result};
use crate::series::Series;

fn check_input_len(input_len: usize) -> Result<usize> {
    if input_len == 0 || input_len % 4 != 0 {
        return Err(Error::Config(format!(
            "input length must be a positive multiple of 4, got {input_len}"
        )));
    }
    Ok(input_len / 4)
}

/// Cuts `(input, target)` windows with inputs of `input_len` and targets of
/// `input_len / 4`, at origins `input_len - 1`, `input_len - 1 + stride`, ...
pub fn make_windows(series: &Series, input_len: usize, stride: usize) -> Result<Vec<WindowPair>> {
    make_windows_paired(series, series, input_len, stride)
}

/// Like [`make_windows`], but inputs come from `inputs` and targets from
/// `targets` (equal-length series). Used when inputs are smoothed but
/// targets must stay raw.
pub fn make_windows_paired(inputs: &Series, targets: &Series, input_len: usize, stride: usize) -> Result<Vec<WindowPair>> {
    inputs.require_univariate("make_windows")?;
    targets.require_univariate("make_windows")?;
    let horizon = check_input_len(input_len)?;
    if stride == 0 {
        return Err(Error::Config("window stride must be positive".into()));
    }
    if inputs.len() != targets.len() {
        return Err(Error::Shape(format!(
            "input series has {} points, target series {}",
            inputs.len(),
            targets.len()
        )));
    }
    let n = inputs.len();
    if n < input_len + horizon {
        return Err(Error::SeriesTooShort {
            what: "windowing",
            len: n,
            needed: input_len + horizon,
        });
    }
    let (x, y) = (inputs.values(), targets.values());
    Ok((input_len - 1..n - horizon)
        .step_by(stride)
        .map(|origin| WindowPair {
            input: x[origin + 1 - input_len..=origin].to_vec(),
            target: y[origin + 1..=origin + horizon].to_vec(),
            origin_index: origin,
            segment: 0,
        })
        .collect())
}

/// Windows each series on its own and concatenates the lists, tagging
/// every window with the index of the series it came from. No window spans
/// two series.
pub fn pool_windows(series: &[Series], input_len: usize, stride: usize) -> Result<Vec<WindowPair>> {
    if series.is_empty() {
        return Err(Error::Empty("no series to window"));
    }
    let mut pool = Vec::new();
    for (segment, s) in series.iter().enumerate() {
        pool.extend(make_windows(s, input_len, stride)?.into_iter().map(|mut w| {
            w.segment = segment;
            w
        }));
    }
    Ok(pool)
}

/// `S_0 = x_0`, `S_t = alpha * x_t + (1 - alpha) * S_{t-1}`.
pub fn exponential_smoothing(values: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("smoothing factor must be in (0, 1], got {alpha}")));
    }
    let mut out = Vec::with_capacity(values.len());
    let mut prev = match values.first() {
        Some(&v) => v,
        None => return Ok(out),
    };
    out.push(prev);
    for &v in &values[1..] {
        // A level series must stay bit-identical under smoothing.
        if v != prev {
            prev = alpha * v + (1.0 - alpha) * prev;
        }
        out.push(prev);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize) -> Series {
        Series::new("r", (0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn single_window_at_exact_length() {
        let w = make_windows(&ramp(20), 16, 1).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].input, (0..16).map(|i| i as f64).collect::<Vec<_>>());
        assert_eq!(w[0].target, vec![16.0, 17.0, 18.0, 19.0]);
        assert_eq!(w[0].origin_index, 15);
    }

    #[test]
    fn window_count_matches_enumeration() {
        // Enumerate every start position whose input+target fits.
        let (n, l) = (20usize, 8usize);
        let brute = (0..n).filter(|s| s + l + l / 4 <= n).count();
        assert_eq!(brute, 11);
        assert_eq!(make_windows(&ramp(n), l, 1).unwrap().len(), brute);
        let strided = (0..n).filter(|s| s + l + l / 4 <= n && s % 3 == 0).count();
        assert_eq!(make_windows(&ramp(n), l, 3).unwrap().len(), strided);
    }

    #[test]
    fn too_short_and_bad_length_rejected() {
        assert!(matches!(make_windows(&ramp(12), 16, 1), Err(Error::SeriesTooShort { .. })));
        assert!(matches!(make_windows(&ramp(40), 10, 1), Err(Error::Config(_))));
    }

    #[test]
    fn windows_are_contiguous_and_ordered() {
        let w = make_windows(&ramp(60), 8, 2).unwrap();
        for pair in w.windows(2) {
            assert!(pair[1].origin_index > pair[0].origin_index);
        }
        for win in &w {
            assert_eq!(win.input.last().unwrap() + 1.0, win.target[0]);
            assert_eq!(*win.input.last().unwrap(), win.origin_index as f64);
        }
    }

    #[test]
    fn pooled_windows_never_straddle() {
        let parts: Vec<Series> = (0..3)
            .map(|k| Series::new(format!("p{k}"), (0..60).map(|i| (k * 1000 + i) as f64).collect()).unwrap())
            .collect();
        let pool = pool_windows(&parts, 8, 1).unwrap();
        assert_eq!(pool.len(), 3 * make_windows(&parts[0], 8, 1).unwrap().len());
        for w in &pool {
            let seg = (w.input[0] / 1000.0).floor() as usize;
            assert_eq!(seg, w.segment);
            assert!(w.target.iter().all(|v| (v / 1000.0).floor() as usize == seg));
        }
    }

    #[test]
    fn smoothing_recurrence() {
        assert_eq!(exponential_smoothing(&[0.0, 1.0, 0.0, 1.0], 0.5).unwrap(), vec![0.0, 0.5, 0.25, 0.625]);
        assert_eq!(exponential_smoothing(&[3.0; 5], 0.3).unwrap(), vec![3.0; 5]);
        let x = [1.0, -2.0, 5.0];
        assert_eq!(exponential_smoothing(&x, 1.0).unwrap(), x.to_vec());
        assert!(exponential_smoothing(&x, 0.0).is_err());
    }
}

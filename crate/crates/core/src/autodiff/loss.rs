use super::Tensor;
use crate::error::{Error, Result};

fn check(pred: &Tensor, target: &Tensor, what: &str) -> Result<()> {
    if pred.shape() != target.shape() {
        return Err(Error::Shape(format!(
            "{what}: prediction shape {:?} vs target shape {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    Ok(())
}

/// Mean squared difference. On a tape use [`super::Tape::mse`].
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<f64> {
    check(pred, target, "mse")?;
    let s: f64 = pred.data().iter().zip(target.data()).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(s / pred.len() as f64)
}

/// Mean absolute difference.
pub fn mae_metric(pred: &Tensor, target: &Tensor) -> Result<f64> {
    check(pred, target, "mae")?;
    Ok(mae(pred.data(), target.data()))
}

pub(crate) fn mae(pred: &[f64], target: &[f64]) -> f64 {
    pred.iter().zip(target).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Tensor {
        Tensor::vector(x.to_vec()).unwrap()
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&v(&[1.0, 2.0]), &v(&[1.0, 2.0])).unwrap(), 0.0);
        assert_eq!(mse_loss(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap(), 1.0);
        assert!(mse_loss(&v(&[0.0]), &v(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae_metric(&v(&[1.0, 2.0]), &v(&[2.0, 4.0])).unwrap(), 1.5);
        assert_eq!(mae_metric(&v(&[3.0, -1.0]), &v(&[3.0, -1.0])).unwrap(), 0.0);
        let c = -2.5;
        let a = [0.3, 1.7, -4.0];
        let b = [1.0, 0.2, 2.0];
        let scaled = mae_metric(&v(&a.map(|x| c * x)), &v(&b.map(|x| c * x))).unwrap();
        assert!((scaled - c.abs() * mae_metric(&v(&a), &v(&b)).unwrap()).abs() < 1e-12);
        assert!(mae_metric(&v(&[1.0]), &Tensor::matrix(1, 1, vec![1.0]).unwrap()).is_err());
    }
}

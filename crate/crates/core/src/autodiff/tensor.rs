use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DType {
    Real,
    Complex,
}

impl DType {
    /// Result dtype of a binary operation.
    pub fn promote(self, other: DType) -> DType {
        if self == DType::Complex || other == DType::Complex {
            DType::Complex
        } else {
            DType::Real
        }
    }
}

/// Dense row-major tensor of real or complex elements.
///
/// Elements are stored as `Complex64` regardless of dtype. A real tensor
/// keeps every imaginary part at exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    dtype: DType,
    data: Vec<Complex64>,
}

impl Tensor {
    pub fn real(shape: impl Into<Vec<usize>>, data: Vec<f64>) -> Result<Self> {
        let shape = shape.into();
        check_len(data.len(), &shape)?;
        Ok(Self {
            shape,
            dtype: DType::Real,
            data: data.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        })
    }

    pub fn complex(shape: impl Into<Vec<usize>>, data: Vec<Complex64>) -> Result<Self> {
        let shape = shape.into();
        check_len(data.len(), &shape)?;
        Ok(Self {
            shape,
            dtype: DType::Complex,
            data,
        })
    }

    /// Real vector of shape `[len]`.
    pub fn vector(data: Vec<f64>) -> Self {
        let n = data.len();
        Self::real(vec![n], data).expect("length matches by construction")
    }

    /// Real matrix from row-major data.
    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::real(vec![rows, cols], data)
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: Vec::new(),
            dtype: DType::Real,
            data: vec![Complex64::new(value, 0.0)],
        }
    }

    pub fn zeros(shape: impl Into<Vec<usize>>, dtype: DType) -> Self {
        let shape = shape.into();
        let n = shape.iter().product();
        Self {
            shape,
            dtype,
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub(crate) fn from_parts(shape: Vec<usize>, dtype: DType, mut data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), shape.iter().product::<usize>());
        if dtype == DType::Real {
            for z in &mut data {
                z.im = 0.0;
            }
        }
        Self { shape, dtype, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn is_real(&self) -> bool {
        self.dtype == DType::Real
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Real parts of every element.
    pub fn re(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.im).collect()
    }

    /// Value of a single-element tensor.
    pub fn item(&self) -> Option<Complex64> {
        (self.data.len() == 1).then(|| self.data[0])
    }

    /// Element `(i, j)` of a rank-2 tensor.
    pub fn at2(&self, i: usize, j: usize) -> Complex64 {
        debug_assert_eq!(self.shape.len(), 2);
        self.data[i * self.shape[1] + j]
    }

    /// Mutable access to the underlying real parts, for optimizer updates.
    pub(crate) fn real_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.data.iter_mut().map(|z| &mut z.re)
    }

    pub fn reshaped(&self, shape: impl Into<Vec<usize>>) -> Result<Self> {
        let shape = shape.into();
        check_len(self.data.len(), &shape)?;
        Ok(Self {
            shape,
            dtype: self.dtype,
            data: self.data.clone(),
        })
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn check_len(len: usize, shape: &[usize]) -> Result<()> {
    if len != shape.iter().product::<usize>() {
        return Err(Error::DataLength {
            len,
            shape: shape.to_vec(),
        });
    }
    Ok(())
}

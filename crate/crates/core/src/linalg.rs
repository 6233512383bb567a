//! Row-major matrices and the gemm kernels behind the network stack.
//!
//! All products are computed in fixed 32-row output chunks. Each chunk is a
//! self-contained `dgemm` call, so enabling the `parallel` feature (or
//! changing the thread count) redistributes chunks across threads without
//! changing a single output bit: every element is always produced by the
//! same call shape with the same accumulation order.

use alloc::vec;
use alloc::vec::Vec;

/// Output rows per gemm task. Fixed so results never depend on thread count.
const ROW_CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape does not match data length");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copies `src` row into row `r`.
    pub fn set_row(&mut self, r: usize, src: &[f64]) {
        assert_eq!(src.len(), self.cols);
        self.row_mut(r).copy_from_slice(src);
    }
}

/// How the left/right operands are interpreted by [`matmul`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    /// Use the matrix as stored.
    None,
    /// Use the transpose of the stored matrix.
    Transpose,
}

struct GemmOperand<'a> {
    data: &'a [f64],
    rsa: isize,
    csa: isize,
    rows: usize,
    cols: usize,
}

fn operand<'a>(m: &'a Mat, op: Op) -> GemmOperand<'a> {
    match op {
        Op::None => GemmOperand {
            data: &m.data,
            rsa: m.cols as isize,
            csa: 1,
            rows: m.rows,
            cols: m.cols,
        },
        Op::Transpose => GemmOperand {
            data: &m.data,
            rsa: 1,
            csa: m.cols as isize,
            rows: m.cols,
            cols: m.rows,
        },
    }
}

/// `C = op_a(A) * op_b(B)`, deterministic under any thread count.
pub fn matmul(a: &Mat, op_a: Op, b: &Mat, op_b: Op) -> Mat {
    let lhs = operand(a, op_a);
    let rhs = operand(b, op_b);
    assert_eq!(
        lhs.cols, rhs.rows,
        "inner dimensions differ: {} vs {}",
        lhs.cols, rhs.rows
    );
    let (m, k, n) = (lhs.rows, lhs.cols, rhs.cols);
    let mut c = Mat::zeros(m, n);

    let task = |chunk_idx: usize, out: &mut [f64]| {
        let r0 = chunk_idx * ROW_CHUNK;
        let m_chunk = out.len() / n;
        // The lhs pointer advances r0 rows along op_a(A).
        let a_off = (r0 as isize * lhs.rsa) as usize;
        unsafe {
            matrixmultiply::dgemm(
                m_chunk,
                k,
                n,
                1.0,
                lhs.data.as_ptr().add(a_off),
                lhs.rsa,
                lhs.csa,
                rhs.data.as_ptr(),
                rhs.rsa,
                rhs.csa,
                0.0,
                out.as_mut_ptr(),
                n as isize,
                1,
            );
        }
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        c.data
            .par_chunks_mut(ROW_CHUNK * n)
            .enumerate()
            .for_each(|(i, out)| task(i, out));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, out) in c.data.chunks_mut(ROW_CHUNK * n).enumerate() {
            task(i, out);
        }
    }
    c
}

/// Adds `row` to every row of `m`.
pub fn add_row_broadcast(m: &mut Mat, row: &[f64]) {
    assert_eq!(row.len(), m.cols);
    for r in 0..m.rows {
        for (dst, src) in m.row_mut(r).iter_mut().zip(row) {
            *dst += *src;
        }
    }
}

/// Column sums of `m` (used for bias gradients); sequential and stable.
pub fn column_sums(m: &Mat) -> Vec<f64> {
    let mut out = vec![0.0; m.cols];
    for r in 0..m.rows {
        for (acc, v) in out.iter_mut().zip(m.row(r)) {
            *acc += *v;
        }
    }
    out
}

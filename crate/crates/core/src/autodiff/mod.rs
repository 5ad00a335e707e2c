//! Minimal reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] records every forward operation together with the values the
//! backward pass needs. Sparse operators enter only as constants through
//! [`Tape::spmm`]; they are never differentiated.
//!
//! ```
//! use gpcn::autodiff::Tape;
//! use gpcn::Matrix;
//!
//! let mut tape = Tape::new();
//! let a = tape.leaf(Matrix::scalar(3.0), true).unwrap();
//! let b = tape.leaf(Matrix::scalar(4.0), true).unwrap();
//! let c = tape.matmul(a, b).unwrap();
//! let grads = tape.backward(c).unwrap();
//! assert_eq!(tape.value(c).get(0, 0), 12.0);
//! assert_eq!(grads.get(a).unwrap().get(0, 0), 4.0);
//! assert_eq!(grads.get(b).unwrap().get(0, 0), 3.0);
//! ```

mod gradcheck;
mod tape;

pub use gradcheck::{gradcheck, rel_err};
pub use tape::{Gradients, Precision, Tape, Var};

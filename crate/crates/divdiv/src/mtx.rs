//! Matrix Market coordinate export.

use std::io::Write;

use divdiv_core::sparse::CsrMatrix;

use crate::error::Result;

pub fn write_matrix_market<W: Write>(a: &CsrMatrix, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (r, c, v) in a.triplets() {
        writeln!(w, "{} {} {:e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

//! File formats: PGM/PPM images, kernel text files and CSV tables.

mod csvio;
mod kernel_text;
mod pnm;

pub use csvio::{read_signal_csv, write_signal_csv, write_table_csv};
pub use kernel_text::{parse_kernel, read_kernel, format_kernel, write_kernel};
pub use pnm::{read_pnm, write_pnm, PnmEncoding};

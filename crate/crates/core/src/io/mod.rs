//! File formats: ESRI ASCII grids, the `par_list` parameter file, initial
//! conditions, hydrographs, and snapshot outputs.

pub mod asc;
pub mod hydrograph;
pub mod init;
pub mod output;
pub mod parlist;

pub use asc::{parse_asc, read_asc, write_asc, AscGrid, AscHeader};
pub use hydrograph::{load_hydrograph, parse_hydrograph, Hydrograph, InflowCell, InflowSample, Side};
pub use init::load_initial_state;
pub use output::{time_label, write_contour_csv, write_run_report, write_snapshot, CSV_HEADER};
pub use parlist::{format_par_list, parse_par_list, parse_par_list_str};

pub mod clopen;
pub mod context;
pub mod homeo;
pub mod prefix_map;
pub mod tailmap;
pub mod tree;
pub mod word;

pub use clopen::Clopen;
pub use context::{Branch, Loc, PointContext, PointLoc};
pub use homeo::{example_2_3, example_2_3_report, orbit_witness, piecewise_glue, two_point_context, EPHomeo, Prog, Strand};
pub use prefix_map::PrefixMap;
pub use tailmap::{ClopenType, Label, TailClopen, TailMap};
pub use tree::Tree;
pub use word::{w, Point, Word};

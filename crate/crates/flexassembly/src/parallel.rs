//! Edge evaluation spread over a thread pool. Every edge is independent, so
//! the table is the same as the serial one whatever the thread count.

use flexassembly_core::pathopt::{evaluate_edge, Edge, EdgeTable};
use flexassembly_core::scenario::Scenario;
use flexassembly_core::Result;
use rayon::prelude::*;

pub fn evaluate_edges(sc: &Scenario, edges: &[Edge]) -> Result<EdgeTable> {
    let records: Vec<_> = edges.par_iter().map(|e| evaluate_edge(sc, e)).collect::<Result<_>>()?;
    Ok(records.into_iter().map(|r| (r.edge, r)).collect())
}

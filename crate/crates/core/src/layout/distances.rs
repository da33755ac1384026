use crate::data::{DistanceMatrix, Slice};
use crate::error::{Error, Result};
use crate::layout::DistanceTransform;

/// All-pairs shortest-path dissimilarities over the present nodes of a
/// slice, with edge lengths given by `transform(weight)`.
pub fn graph_distances(slice: &Slice, transform: DistanceTransform) -> Result<DistanceMatrix> {
    let (nodes, adj) = slice.local_adjacency();
    let n = nodes.len();
    if n < 2 {
        return Err(Error::EmptySlice(slice.time().to_string()));
    }
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (i, nbrs) in adj.iter().enumerate() {
        for &(j, w) in nbrs {
            let len = transform.apply(w)?;
            d[i][j] = d[i][j].min(len);
        }
    }
    // Floyd-Warshall
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    // Rounding in the relaxation order can leave d[i][j] and d[j][i] a ulp apart.
    for i in 0..n {
        for j in (i + 1)..n {
            let m = d[i][j].min(d[j][i]);
            d[i][j] = m;
            d[j][i] = m;
        }
    }
    DistanceMatrix::from_rows(nodes, d)
}

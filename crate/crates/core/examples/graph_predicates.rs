//! Laplacian, coupling matrices and leader reachability for the five-agent ring.

use mas_sim::graph::{self, DEFAULT_EIGEN_TOL};
use mas_sim::presets;

fn main() {
    let ring = presets::ring_topology();
    let m = graph::h_matrices(&ring, 1.0).expect("valid topology");
    println!("L =\n{:.0}", m.laplacian);

    for (name, h) in [("lB + L", &m.h1), ("B + L", &m.h2)] {
        let mut eig: Vec<f64> = graph::eigenvalues(h).unwrap().into_iter().map(|(re, _)| re).collect();
        eig.sort_by(f64::total_cmp);
        println!(
            "{name:>7}: eigenvalues {eig:.4?}, positive stable: {}",
            graph::is_positive_stable(h, DEFAULT_EIGEN_TOL).unwrap()
        );
    }
    println!("leader reachable: {}", graph::is_leader_globally_reachable(&ring));

    let cut = presets::ring_topology_with_leader(&[0.0; 5]);
    let eig = graph::eigenvalues(&graph::laplacian(&cut)).unwrap();
    let zero = eig.iter().map(|(re, _)| re.abs()).fold(f64::INFINITY, f64::min);
    println!("without the leader link: reachable {}, smallest |eig(L)| = {zero:.1e}", graph::is_leader_globally_reachable(&cut));
}

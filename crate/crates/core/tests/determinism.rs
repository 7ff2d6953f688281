mod common;

use carpenter::{carpenter, carpenter_field, plan, Cell, CellField};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_field(seed: u64, n: usize) -> CellField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = (0..n)
        .map(|i| Cell {
            cell: format!("cell-{i:03}"),
            spec: common::random_feasible_spec(&mut rng),
        })
        .collect();
    CellField::new(cells).unwrap()
}

#[test]
fn repeated_runs_serialize_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let spec = common::random_feasible_spec(&mut rng);
        let a = serde_json::to_string(&carpenter(&spec, 8).unwrap()).unwrap();
        let b = serde_json::to_string(&carpenter(&spec, 8).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn parallel_and_serial_fields_agree() {
    let field = random_field(11, 30);
    let serial = serde_json::to_string(&carpenter_field(&field, 6, false).unwrap()).unwrap();
    let parallel = serde_json::to_string(&carpenter_field(&field, 6, true).unwrap()).unwrap();
    assert_eq!(serial, parallel);
}

#[test]
fn cell_output_does_not_depend_on_neighbours() {
    let field = random_field(12, 20);
    let out = carpenter_field(&field, 6, true).unwrap();
    let mut shuffled: Vec<Cell> = field.cells().to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let out2 = carpenter_field(&CellField::new(shuffled).unwrap(), 6, true).unwrap();
    for c in &out.cells {
        let d = out2.get(&c.cell).unwrap();
        assert_eq!(serde_json::to_string(c).unwrap(), serde_json::to_string(d).unwrap());
    }
    for (c, cell) in out.cells.iter().zip(field.cells()) {
        assert_eq!(c.cell, cell.cell);
        assert_eq!(c.label, plan(&cell.spec).unwrap().label);
    }
}

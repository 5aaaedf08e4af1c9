//! Writes a small synthetic motion dataset for trying out the CLI.
//!
//! `cargo run -p hsi-core --example demo_dataset -- demo.json`

use std::path::PathBuf;

use hsi_core::episode_init::{MotionClip, MotionDataset, SubsetLabel};
use hsi_core::experiment::synthetic_carry_clip;

fn main() {
    let path = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "demo_dataset.json".into()),
    );
    let carry = synthetic_carry_clip("carry_demo", 90, 1);
    let loco = MotionClip {
        subset: SubsetLabel::Loco,
        ..synthetic_carry_clip("loco_demo", 60, 2)
    };
    let sit = MotionClip {
        subset: SubsetLabel::Sit,
        ..synthetic_carry_clip("sit_demo", 45, 3)
    };
    let ds = MotionDataset::new(vec![carry, loco, sit]);
    if let Err(e) = ds.save(&path) {
        eprintln!("{e}");
        std::process::exit(2);
    }
    println!("wrote {} clips to {}", ds.clips.len(), path.display());
}

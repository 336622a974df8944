use slrec::descent::*;
use slrec::driver::{gen_instance, Disguise};
use slrec::mslp::WordArena;
use slrec::rnd::Budget;
use slrec::gfq::FieldSpec;
use std::sync::Arc;

fn main() {
    let f = Arc::new(FieldSpec::from_order(2).unwrap());
    for d in [12usize, 16, 25] {
        let mut used = Vec::new();
        let mut chains = Vec::new();
        for seed in 0..10u64 {
            let x = gen_instance(d, f.clone(), seed, Disguise::Conjugate);
            let mut arena = WordArena::new(x.len());
            let mut budget = Budget::new(100_000);
            match going_down(&x, &mut arena, &mut budget, seed, Strategy::Naming) {
                Ok(o) => { used.push(budget.used()); chains.push(o.degrees); }
                Err(e) => println!("d={d} seed={seed}: {e:?}"),
            }
        }
        used.sort();
        println!("d={d}: draws used {:?}", used);
        println!("   chains: {:?}", chains);
    }
}

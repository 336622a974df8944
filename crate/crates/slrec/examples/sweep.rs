use slrec::descent::Strategy;
use slrec::driver::*;
use slrec::gfq::FieldSpec;
use std::sync::Arc;

fn main() {
    let ds: Vec<usize> = vec![4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 16, 25];
    let qs: Vec<u64> = vec![2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 49, 121];
    let mut fails: Vec<String> = Vec::new();
    let mut total = 0;
    for &q in &qs {
        let field = Arc::new(FieldSpec::from_order(q).unwrap());
        for &d in &ds {
            for seed in 0..3u64 {
                total += 1;
                let x = gen_instance(d, field.clone(), seed * 7 + d as u64 + q, Disguise::Conjugate);
                match standard_generators(&x, Budgets::defaults_for(d, q), seed, Strategy::Naming, true) {
                    Ok(r) if r.verified => {}
                    Ok(_) => fails.push(format!("d={d} q={q} seed={seed}: unverified")),
                    Err(e) => fails.push(format!("d={d} q={q} seed={seed}: {e}")),
                }
            }
        }
    }
    println!("sweep: {} failures / {total} runs", fails.len());
    for f in &fails {
        println!("  {f}");
    }
}

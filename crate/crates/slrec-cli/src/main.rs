//! Command-line driver: generate disguised SL(d,q) instances, run the
//! recognition pipeline, verify result bundles and benchmark.

use clap::{Parser, Subcommand, ValueEnum};
use slrec::descent::Strategy;
use slrec::driver::{
    self, bench, field_line, gen_instance, read_matrices, standard_generators, write_matrices,
    Budgets, Disguise, Report,
};
use slrec::gfq::FieldSpec;
use slrec::matfq::Matrix;
use slrec::mslp::{Handle, Mslp, WordArena};
use slrec::rnd::{Budget, PrSource};
use slrec::stingray::{body_bounds, find_stingray_element};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "slrec", about = "Constructive recognition of SL(d,q)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Naming,
    Restart,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Naming => Strategy::Naming,
            StrategyArg::Restart => Strategy::Restart,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DisguiseArg {
    Identity,
    Conjugate,
    Products,
}

impl From<DisguiseArg> for Disguise {
    fn from(d: DisguiseArg) -> Disguise {
        match d {
            DisguiseArg::Identity => Disguise::Identity,
            DisguiseArg::Conjugate => Disguise::Conjugate,
            DisguiseArg::Products => Disguise::Products,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a disguised generating set of SL(d,q)
    Gen {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = DisguiseArg::Conjugate)]
        disguise: DisguiseArg,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recognize a generating set: write L.mat, prog.mslp and report.json
    Recognize {
        /// Generators file (FIELD + MATRIX blocks)
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Budgets N1,N2,N3 (defaults scale with the degree)
        #[arg(long, value_name = "N1,N2,N3")]
        budget: Option<String>,
        #[arg(long, value_enum, default_value_t = StrategyArg::Naming)]
        strategy: StrategyArg,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Skip the final evaluation check (benchmarking only)
        #[arg(long)]
        no_verify: bool,
    },
    /// Re-evaluate a result bundle against the input generators
    Verify {
        /// Generators file
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Directory holding L.mat and prog.mslp
        #[arg(long, default_value = ".")]
        result_dir: PathBuf,
    },
    /// Timing table over a list of (d,q) pairs
    Bench {
        /// Comma-separated d:q pairs, e.g. 100:4,200:5
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "N1,N2,N3")]
        budget: Option<String>,
        #[arg(long)]
        no_verify: bool,
        /// Output CSV file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample stingray certificates and print their shapes
    StingrayDemo {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        budget: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

fn parse_budgets(s: &str) -> Result<Budgets, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("budget must be three comma-separated integers N1,N2,N3".into());
    }
    let ns: Result<Vec<u64>, _> = parts.iter().map(|p| p.trim().parse::<u64>()).collect();
    let ns = ns.map_err(|e| format!("bad budget: {e}"))?;
    Ok(Budgets { n1: ns[0], n2: ns[1], n3: ns[2] })
}

fn parse_spec(s: &str) -> Result<Vec<(usize, u64)>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let (d, q) = part
            .split_once(':')
            .ok_or_else(|| format!("bad spec entry `{part}`, expected d:q"))?;
        let d = d.trim().parse::<usize>().map_err(|e| e.to_string())?;
        let q = q.trim().parse::<u64>().map_err(|e| e.to_string())?;
        out.push((d, q));
    }
    Ok(out)
}

fn emit(path: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { d, q, seed, disguise, out } => {
            if d < 4 {
                return Err("degree must be at least 4".into());
            }
            let field = Arc::new(FieldSpec::from_order(q).map_err(|e| e.to_string())?);
            let x = gen_instance(d, field, seed, disguise.into());
            emit(&out, &write_matrices(&x)).map_err(|e| e.to_string())?;
            Ok(())
        }
        Command::Recognize { input, seed, budget, strategy, out_dir, no_verify } => {
            let text = std::fs::read_to_string(&input).map_err(|e| e.to_string())?;
            let (x, field) = read_matrices(&text).map_err(|e| e.to_string())?;
            let d = x[0].nrows();
            let budgets = match budget {
                Some(b) => parse_budgets(&b)?,
                None => Budgets::defaults_for(d, field.q()),
            };
            let result = standard_generators(&x, budgets, seed, strategy.into(), !no_verify)
                .map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&out_dir).map_err(|e| e.to_string())?;
            std::fs::write(out_dir.join("L.mat"), write_matrices(&[result.l.clone()]))
                .map_err(|e| e.to_string())?;
            std::fs::write(out_dir.join("prog.mslp"), result.slp.serialize())
                .map_err(|e| e.to_string())?;
            let report = Report::from_result(&result, seed, budgets);
            std::fs::write(
                out_dir.join("report.json"),
                serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
            println!(
                "recognized SL({d},{}) chain={:?} draws={:?} verified={}",
                report.q, report.chain, report.draws_used, result.verified
            );
            if !no_verify && !result.verified {
                return Err("final verification failed".into());
            }
            Ok(())
        }
        Command::Verify { input, result_dir } => {
            let ok = verify_bundle(&input, &result_dir)?;
            println!("{}", if ok { "VERIFIED" } else { "MISMATCH" });
            if ok {
                Ok(())
            } else {
                Err("verification failed".into())
            }
        }
        Command::Bench { spec, repeats, seed, budget, no_verify, out } => {
            let specs = parse_spec(&spec)?;
            let budgets = match budget {
                Some(b) => Some(parse_budgets(&b)?),
                None => None,
            };
            let csv = bench(&specs, repeats, budgets, seed, !no_verify);
            emit(&out, &csv).map_err(|e| e.to_string())?;
            Ok(())
        }
        Command::StingrayDemo { d, q, seed, budget, count } => {
            stingray_demo(d, q, seed, budget, count)
        }
    }
}

fn verify_bundle(input: &Path, result_dir: &Path) -> Result<bool, String> {
    let text = std::fs::read_to_string(input).map_err(|e| e.to_string())?;
    let (x, _) = read_matrices(&text).map_err(|e| e.to_string())?;
    let ltext =
        std::fs::read_to_string(result_dir.join("L.mat")).map_err(|e| e.to_string())?;
    let (lmats, _) = read_matrices(&ltext).map_err(|e| e.to_string())?;
    let ptext =
        std::fs::read_to_string(result_dir.join("prog.mslp")).map_err(|e| e.to_string())?;
    let prog = Mslp::deserialize(&ptext).map_err(|e| e.to_string())?;
    Ok(driver::verify(&x, &lmats[0], &prog))
}

fn stingray_demo(d: usize, q: u64, seed: u64, budget: u64, count: usize) -> Result<(), String> {
    let field = Arc::new(FieldSpec::from_order(q).map_err(|e| e.to_string())?);
    println!("# {}", field_line(&field));
    let gens = slrec::matfq::standard_generators(d, d, field.clone());
    let mut arena = WordArena::new(gens.len());
    let tracked: Vec<(Matrix, Handle)> =
        gens.iter().cloned().enumerate().map(|(i, m)| (m, arena.input(i))).collect();
    let mut src = PrSource::new(&tracked, seed, &mut arena).map_err(|e| e.to_string())?;
    let mut b = Budget::new(budget);
    let (lo, hi) = body_bounds(d);
    println!("stingray search in SL({d},{q}): body bounds [{lo},{hi}], budget {budget}");
    for i in 0..count {
        match find_stingray_element(&mut src, &mut arena, &mut b, lo, hi) {
            Ok(cert) => {
                println!(
                    "cert {i}: m={} tail_dim={} factor_deg={} B={} ppd_certified={} draws_used={}",
                    cert.m,
                    cert.tail.dim(),
                    cert.stingray_factor.deg().unwrap(),
                    cert.power,
                    cert.ppd_certified,
                    b.used()
                );
            }
            Err(e) => {
                println!("cert {i}: fail ({e})");
                break;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

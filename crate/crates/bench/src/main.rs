use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use rsdict::{DictKind, Params, RawBitVector};
use rsdict_bench::{
    adversarial, build_for, entropy_row, generate, generate_exact, parse_count, queries, size_row,
    thread_pool, time_op, verify_structure, Coverage, Op, Oracle, Row, CSV_HEADER,
};

/// Build, check and measure rank/select dictionaries.
#[derive(Parser)]
#[command(name = "rsdict", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare every structure against a linear-scan oracle.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Skip the hand-made adversarial vectors.
        #[arg(long)]
        no_adversarial: bool,
        /// Flip a payload byte of each serialized dictionary; verification
        /// must then fail.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Time random queries and report sizes as CSV.
    Measure {
        #[command(flatten)]
        common: Common,
        /// Query kinds to time.
        #[arg(long, value_delimiter = ',', default_value = "rank,select")]
        query: Vec<String>,
        /// Timed repetitions per query kind; the median is reported.
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// Print the size breakdown of each structure.
    Dump {
        #[command(flatten)]
        common: Common,
        /// Also write each serialized dictionary into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Comma-separated structures, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    structures: Vec<String>,
    /// Bit-vector length; accepts forms like `2^20` or `10*2^20`.
    #[arg(long, default_value = "2^20", value_parser = parse_count)]
    n: usize,
    /// Comma-separated densities of ones.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.001,0.01,0.05,0.25,0.5"
    )]
    density: Vec<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Queries per kind (random verification and timing).
    #[arg(long, default_value = "100000", value_parser = parse_count)]
    ops: usize,
    /// Write CSV rows here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Structure parameter such as `esp.k=2^12` or `vcode.offsets=sampled`.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Place exactly round(density * n) ones instead of drawing each bit.
    #[arg(long)]
    exact_m: bool,
}

impl Common {
    fn kinds(&self) -> Result<Vec<DictKind>> {
        if self.structures.iter().any(|s| s == "all") {
            return Ok(DictKind::ALL.to_vec());
        }
        self.structures
            .iter()
            .map(|s| s.parse::<DictKind>().map_err(Into::into))
            .collect()
    }

    fn params(&self) -> Result<Params> {
        let mut p = Params::default();
        for kv in &self.params {
            let (k, v) = kv
                .split_once('=')
                .with_context(|| format!("--param {kv:?} is not KEY=VALUE"))?;
            p.set(k.trim(), v.trim())?;
        }
        Ok(p)
    }

    fn bits(&self, density: f64) -> Result<RawBitVector> {
        if self.exact_m {
            generate_exact(self.n, density, self.seed)
        } else {
            generate(self.n, density, self.seed)
        }
    }

    fn csv_writer(&self) -> Result<csv::Writer<Box<dyn Write>>> {
        let sink: Box<dyn Write> = match &self.csv {
            Some(path) => Box::new(
                std::fs::File::create(path)
                    .with_context(|| format!("creating {}", path.display()))?,
            ),
            None => Box::new(std::io::stdout()),
        };
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(CSV_HEADER)?;
        Ok(w)
    }
}

fn write_rows(w: &mut csv::Writer<Box<dyn Write>>, rows: &[Row]) -> Result<()> {
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

fn verify(common: &Common, no_adversarial: bool, inject_fault: bool) -> Result<bool> {
    let kinds = common.kinds()?;
    let params = common.params()?;
    let mut datasets: Vec<(String, RawBitVector)> = Vec::new();
    for &d in &common.density {
        datasets.push((format!("density={d}"), common.bits(d)?));
    }
    if !no_adversarial && common.n >= 16 {
        for (name, bits) in adversarial(common.n) {
            datasets.push((name.to_string(), bits));
        }
    }
    let oracles: Vec<Oracle> = datasets.iter().map(|(_, b)| Oracle::new(b)).collect();
    let jobs: Vec<(usize, DictKind)> = (0..datasets.len())
        .flat_map(|d| kinds.iter().map(move |&k| (d, k)))
        .collect();
    let coverage = Coverage::for_len(common.n, common.ops, common.seed);
    let results: Vec<Result<(), String>> = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|&(d, kind)| {
                verify_structure(
                    kind,
                    &datasets[d].1,
                    &oracles[d],
                    &params,
                    coverage,
                    inject_fault,
                )
            })
            .collect()
    });
    let mut ok = true;
    for (&(d, kind), res) in jobs.iter().zip(&results) {
        let (name, bits) = &datasets[d];
        let label = format!(
            "{kind:<8} n={} m={} {name} seed={}",
            bits.len(),
            bits.count_ones(),
            common.seed
        );
        match res {
            Ok(()) => println!("ok   {label}"),
            Err(e) => {
                ok = false;
                println!("FAIL {label}\n     {e}");
            }
        }
    }
    let failed = results.iter().filter(|r| r.is_err()).count();
    println!("{} checks, {failed} failed", results.len());
    Ok(ok)
}

fn measure(common: &Common, query: &[String], reps: usize) -> Result<()> {
    let kinds = common.kinds()?;
    let params = common.params()?;
    let ops: Vec<Op> = query.iter().map(|q| Op::parse(q)).collect::<Result<_>>()?;
    let mut w = common.csv_writer()?;
    for &density in &common.density {
        let bits = common.bits(density)?;
        let (n, m) = (bits.len(), bits.count_ones());
        let mut rows = vec![entropy_row(&bits, density, common.seed)];
        for &kind in &kinds {
            let dict = build_for(kind, &bits, &params)?;
            let size = size_row(&dict, density, common.seed);
            for &op in &ops {
                let args = queries(op, n, m, common.ops, common.seed);
                rows.push(Row {
                    op: op.name().into(),
                    ns_per_op: Some(time_op(&dict, op, &args, reps)),
                    ..size.clone()
                });
            }
            rows.push(size);
        }
        write_rows(&mut w, &rows)?;
    }
    Ok(())
}

fn dump(common: &Common, out: Option<&PathBuf>) -> Result<()> {
    let kinds = common.kinds()?;
    let params = common.params()?;
    let mut rows = Vec::new();
    println!(
        "{:<9} {:>10} {:>9} {:>12} {:>12} {:>12} {:>8} {:>9}",
        "structure", "n", "density", "payload", "directory", "total", "%n", "%nH0"
    );
    for &density in &common.density {
        let bits = common.bits(density)?;
        let h = entropy_row(&bits, density, common.seed);
        println!(
            "{:<9} {:>10} {:>9} {:>12} {:>12} {:>12.0} {:>8.2} {:>9.2}",
            "nH0", h.n, density, "", "", h.size_bits, h.pct_of_n, h.pct_of_nh0
        );
        rows.push(h);
        for &kind in &kinds {
            let dict = build_for(kind, &bits, &params)?;
            let r = dict.size_report();
            println!(
                "{:<9} {:>10} {:>9} {:>12} {:>12} {:>12} {:>8.2} {:>9.2}",
                kind.name(),
                r.n,
                density,
                r.payload_bits,
                r.directory_bits,
                r.total_bits(),
                r.pct_of_n(),
                r.pct_of_nh0()
            );
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(format!("{kind}-{}-{density}-{}.rsd", r.n, common.seed));
                std::fs::write(&path, dict.to_bytes())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            rows.push(size_row(&dict, density, common.seed));
        }
    }
    if common.csv.is_some() {
        write_rows(&mut common.csv_writer()?, &rows)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify {
            common,
            no_adversarial,
            inject_fault,
        } => verify(common, *no_adversarial, *inject_fault),
        Command::Measure {
            common,
            query,
            reps,
        } => measure(common, query, *reps).map(|()| true),
        Command::Dump { common, out } => dump(common, out.as_ref()).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

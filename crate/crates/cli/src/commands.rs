use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use hmmaccel_core::bench::{self, BenchConfig};
use hmmaccel_core::cluster::{build_clusters, filter_low_weight, ClusterTable, Distance};
use hmmaccel_core::model::{bundled_bench_model, sample_sequences, Dataset, HmmModel, SequenceFile};
use hmmaccel_core::train::{em_train, initialize_model, weighted_em_train, TrainingConfig};
use hmmaccel_core::{likelihood, viterbi, Error};

use crate::Command;

pub(crate) fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen {
            model,
            count,
            length,
            seed,
            out,
            renormalize,
        } => {
            let model = load_model(&model, renormalize)?;
            let data = sample_sequences(&model, count, length, seed)?;
            write_file(&out, &data.to_text())
        }
        Command::Cluster {
            input,
            distance,
            out,
            min_weight,
            category,
        } => cluster(&input, distance, &out, min_weight, category),
        Command::Train {
            input,
            init_model,
            seed,
            states,
            symbols,
            iterations,
            tolerance,
            out,
            trace,
            renormalize,
        } => {
            let init = InitSpec {
                model: init_model,
                seed,
                states,
                symbols,
                renormalize,
            };
            let config = TrainingConfig {
                iterations,
                ll_tolerance: tolerance,
                record_history: false,
            };
            let trace_path = trace.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".trace.csv");
                PathBuf::from(p)
            });
            train(&input, &init, &config, &out, &trace_path)
        }
        Command::Eval {
            model,
            input,
            renormalize,
        } => {
            let model = load_model(&model, renormalize)?;
            let file = load_sequences(&input)?;
            let mut out = std::io::stdout().lock();
            for seq in &file.sequences {
                match likelihood(&model, seq) {
                    Ok(ll) => writeln!(out, "{ll}")?,
                    Err(Error::ImpossibleSequence) => writeln!(out, "-inf")?,
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(())
        }
        Command::Decode {
            model,
            input,
            renormalize,
        } => {
            let model = load_model(&model, renormalize)?;
            let file = load_sequences(&input)?;
            let mut out = std::io::stdout().lock();
            for seq in &file.sequences {
                match viterbi(&model, seq) {
                    Ok((path, lp)) => {
                        let states: Vec<String> = path.iter().map(|s| s.to_string()).collect();
                        writeln!(out, "{}\t{lp}", states.join(" "))?
                    }
                    Err(Error::ImpossibleSequence) => writeln!(out, "-\t-inf")?,
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(())
        }
        Command::Dist { a, b, distance } => {
            let a = load_sequences(&a)?;
            let b = load_sequences(&b)?;
            let mut out = std::io::stdout().lock();
            for x in &a.sequences {
                let row: Vec<String> = b
                    .sequences
                    .iter()
                    .map(|y| match distance.between(x, y) {
                        Ok(d) => Ok(d.to_string()),
                        Err(Error::LengthMismatch { .. }) => Ok("NA".to_string()),
                        Err(e) => Err(e),
                    })
                    .collect::<std::result::Result<_, _>>()?;
                writeln!(out, "{}", row.join(" "))?;
            }
            Ok(())
        }
        Command::Bench {
            model,
            mut sizes,
            include_100k,
            length,
            iterations,
            runs,
            seed,
            states,
            distance,
            warped,
            warped_count,
            csv,
            renormalize,
        } => {
            let generator = match model {
                Some(p) => load_model(&p, renormalize)?,
                None => bundled_bench_model(),
            };
            if include_100k && !sizes.contains(&100_000) {
                sizes.push(100_000);
            }
            let config = BenchConfig {
                sizes,
                length,
                iterations,
                runs,
                seed,
                n_states: states,
                distance,
            };
            let mut rows = bench::run_bench(&generator, &config)?;
            if warped {
                let corpus = bench::warped_corpus(
                    25,
                    warped_count,
                    9,
                    generator.n_symbols(),
                    hmmaccel_core::model::derive_seed(seed, u64::MAX),
                )?;
                let init = initialize_model(states, generator.n_symbols(), seed)?;
                rows.push(bench::bench_corpus(&corpus.data, &init, iterations, runs, distance)?);
            }
            let text = bench::reports_to_text(&rows);
            let csv_text = bench::reports_to_csv(&rows);
            print!("{text}");
            match csv {
                Some(path) => write_file(&path, &csv_text)?,
                None => print!("\n{csv_text}"),
            }
            Ok(())
        }
    }
}

struct InitSpec {
    model: Option<PathBuf>,
    seed: u64,
    states: usize,
    symbols: Option<usize>,
    renormalize: bool,
}

impl InitSpec {
    fn resolve(&self, alphabet: usize) -> Result<HmmModel> {
        let model = match &self.model {
            Some(p) => load_model(p, self.renormalize)?,
            None => initialize_model(self.states, self.symbols.unwrap_or(alphabet), self.seed)?,
        };
        if alphabet > model.n_symbols() {
            bail!(
                "dimension mismatch: data uses symbol {} but the initial model has {} symbols",
                alphabet - 1,
                model.n_symbols()
            );
        }
        Ok(model)
    }
}

enum TrainingInput {
    Sequences(Dataset),
    Clusters(ClusterTable),
}

fn read_training_input(path: &Path) -> Result<TrainingInput> {
    let text = read_file(path)?;
    if text.trim_start().starts_with('{') {
        let table = ClusterTable::from_json_str(&text)
            .with_context(|| format!("invalid cluster table {}", path.display()))?;
        Ok(TrainingInput::Clusters(table))
    } else {
        let file = SequenceFile::parse(&text).with_context(|| format!("reading {}", path.display()))?;
        if file.sequences.is_empty() {
            bail!("{} contains no sequences", path.display());
        }
        Ok(TrainingInput::Sequences(file.into_dataset(0)))
    }
}

fn train(
    input: &Path,
    init: &InitSpec,
    config: &TrainingConfig,
    out: &Path,
    trace_path: &Path,
) -> Result<()> {
    let trace = match read_training_input(input)? {
        TrainingInput::Sequences(data) => {
            let init = init.resolve(data.alphabet_size())?;
            em_train(&init, &data, config)?
        }
        TrainingInput::Clusters(table) => {
            let init = init.resolve(table.representatives().alphabet_size())?;
            weighted_em_train(&init, &table, config)?
        }
    };
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
    write_file(out, &trace.final_model.to_json_string())?;
    write_file(trace_path, &trace.to_csv())
}

fn cluster(
    input: &Path,
    distance: Distance,
    out: &Path,
    min_weight: Option<u64>,
    category: u32,
) -> Result<()> {
    let file = load_sequences(input)?;
    if file.sequences.is_empty() {
        bail!("{} contains no sequences", input.display());
    }
    let data = file.clone().into_dataset(category);
    let start = Instant::now();
    let table = match build_clusters(&data, distance) {
        Ok(t) => t,
        Err(Error::MixedLengths {
            index,
            expected,
            found,
        }) => bail!(
            "{}: line {} has length {found}, expected {expected}; euclidean needs equal lengths, use --distance dtw",
            input.display(),
            file.line_of(index)
        ),
        Err(e) => return Err(e.into()),
    };
    let seconds = start.elapsed().as_secs_f64();
    let table = match min_weight {
        Some(w) => filter_low_weight(&table, w)?,
        None => table,
    };
    write_file(out, &table.to_json_string())?;
    println!(
        "clusters={} total_weight={} seconds={}",
        table.len(),
        table.total_weight,
        bench::fmt_sig(seconds, 6)
    );
    Ok(())
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn load_model(path: &Path, renormalize: bool) -> Result<HmmModel> {
    let text = read_file(path)?;
    HmmModel::from_json_str(&text, renormalize)
        .with_context(|| format!("invalid model file {}", path.display()))
}

fn load_sequences(path: &Path) -> Result<SequenceFile> {
    let text = read_file(path)?;
    SequenceFile::parse(&text).with_context(|| format!("reading {}", path.display()))
}

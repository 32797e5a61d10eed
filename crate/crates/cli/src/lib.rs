// SPDX-License-Identifier: Apache-2.0

//! `scanlock` command-line front end. [`dispatch`] runs one invocation
//! against caller-supplied output streams and returns the exit code.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use scanlock_core::attacks::{make_oracle, make_oracle_locked, sat_attack, sensitization_attack, Oracle};
use scanlock_core::cnf::{encode_circuit, to_dimacs, CnfFormula};
use scanlock_core::des;
use scanlock_core::emulator::Emulator;
use scanlock_core::locking::random_lock_with_prefix;
use scanlock_core::netlist::{
    bits_to_string, equivalent_exhaustive, parse_bench_with_prefix, parse_bits, serialize_bench, KeyVector, Netlist,
    DEFAULT_INPUT_LIMIT, DEFAULT_KEY_PREFIX,
};
use scanlock_core::scan_attack::full_scan_attack;

#[derive(Debug, Parser)]
#[command(name = "scanlock", version, about = "Scan-chain and logic-locking attack toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encrypt or decrypt one DES block.
    Des {
        #[command(subcommand)]
        op: DesOp,
    },
    /// Recover the key of an emulated DES core through its scan chain.
    ScanAttack {
        #[arg(long)]
        seed: u64,
        /// Force this key instead of drawing one from the seed.
        #[arg(long)]
        key: Option<String>,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Insert random XOR/XNOR key gates.
    Lock {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        keys: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        key_out: PathBuf,
        /// Name prefix for the inserted key inputs.
        #[arg(long, default_value = "keyinput")]
        key_prefix: String,
    },
    /// Oracle-guided SAT attack on a locked netlist.
    SatAttack {
        #[arg(long)]
        locked: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
        #[command(flatten)]
        parse: ParseArgs,
    },
    /// Sensitization attack on a locked netlist.
    Sensitize {
        #[arg(long)]
        locked: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long, default_value_t = DEFAULT_INPUT_LIMIT)]
        input_limit: usize,
        #[command(flatten)]
        parse: ParseArgs,
    },
    /// Evaluate a netlist on one input vector.
    Sim {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        inputs: String,
        #[arg(long)]
        key: Option<String>,
        #[command(flatten)]
        parse: ParseArgs,
    },
    /// Exhaustively compare two netlists.
    Equiv {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        key_a: Option<String>,
        #[arg(long)]
        key_b: Option<String>,
        #[command(flatten)]
        parse: ParseArgs,
    },
    /// Write the circuit's CNF encoding in DIMACS format.
    ExportCnf {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        parse: ParseArgs,
    },
}

#[derive(Debug, Subcommand)]
enum DesOp {
    Encrypt(DesArgs),
    Decrypt(DesArgs),
}

#[derive(Debug, Args)]
struct DesArgs {
    /// 16 hex digits.
    #[arg(long)]
    key: String,
    /// 16 hex digits.
    #[arg(long = "in")]
    input: String,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Netlist of the working chip.
    #[arg(long)]
    oracle: PathBuf,
    /// Key that activates the oracle netlist, if it is locked.
    #[arg(long)]
    oracle_key: Option<String>,
}

#[derive(Debug, Args)]
struct ParseArgs {
    /// Inputs whose names start with this are key inputs.
    #[arg(long, default_value = DEFAULT_KEY_PREFIX)]
    key_prefix: String,
}

fn load(path: &Path, prefix: &str) -> Result<Netlist> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_bench_with_prefix(&text, prefix).with_context(|| format!("parsing {}", path.display()))
}

fn key_arg(text: Option<&str>) -> Result<Option<KeyVector>> {
    text.map(|t| KeyVector::parse(t.trim()).context("key bits")).transpose()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn build_oracle(args: &OracleArgs, prefix: &str) -> Result<Oracle> {
    let design = load(&args.oracle, prefix)?;
    let oracle = match key_arg(args.oracle_key.as_deref())? {
        Some(key) => make_oracle_locked(design, key)?,
        None => make_oracle(design).context("oracle netlist has key inputs; pass --oracle-key")?,
    };
    Ok(oracle)
}

fn run(cli: Cli) -> Result<String> {
    let mut out = String::new();
    match cli.command {
        Command::Des { op } => {
            let text = match op {
                DesOp::Encrypt(a) => des::encrypt_hex(&a.key, &a.input)?,
                DesOp::Decrypt(a) => des::decrypt_hex(&a.key, &a.input)?,
            };
            writeln!(out, "{text}")?;
        }
        Command::ScanAttack { seed, key, report } => {
            let mut emu = Emulator::from_hex_key(Some(seed), key.as_deref())?;
            let r = full_scan_attack(&mut emu)?;
            let text = r.to_string();
            if let Some(path) = report {
                write_file(&path, &text)?;
            }
            out.push_str(&text);
        }
        Command::Lock {
            input,
            keys,
            seed,
            out: out_path,
            key_out,
            key_prefix,
        } => {
            let n = load(&input, DEFAULT_KEY_PREFIX)?;
            let d = random_lock_with_prefix(&n, keys, seed, &key_prefix)?;
            write_file(&out_path, &serialize_bench(&d.locked))?;
            write_file(&key_out, &format!("{}\n", d.key))?;
            for g in &d.record.gates {
                writeln!(out, "{}: {} after {}", g.key_input, g.kind, g.target)?;
            }
            writeln!(out, "key: {}", d.key)?;
        }
        Command::SatAttack { locked, oracle, parse } => {
            let locked = load(&locked, &parse.key_prefix)?;
            let oracle = build_oracle(&oracle, &parse.key_prefix)?;
            out.push_str(&sat_attack(&locked, &oracle)?.to_string());
        }
        Command::Sensitize {
            locked,
            oracle,
            input_limit,
            parse,
        } => {
            let locked = load(&locked, &parse.key_prefix)?;
            let oracle = build_oracle(&oracle, &parse.key_prefix)?;
            out.push_str(&sensitization_attack(&locked, &oracle, input_limit)?.to_string());
        }
        Command::Sim { input, inputs, key, parse } => {
            let n = load(&input, &parse.key_prefix)?;
            let bits = parse_bits(inputs.trim())?;
            let key = key_arg(key.as_deref())?.unwrap_or_default();
            writeln!(out, "{}", bits_to_string(&n.evaluate(&bits, key.bits())?))?;
        }
        Command::Equiv {
            a,
            b,
            key_a,
            key_b,
            parse,
        } => {
            let a = load(&a, &parse.key_prefix)?;
            let b = load(&b, &parse.key_prefix)?;
            let (ka, kb) = (key_arg(key_a.as_deref())?, key_arg(key_b.as_deref())?);
            let same = equivalent_exhaustive(&a, &b, ka.as_ref(), kb.as_ref())?;
            writeln!(out, "equivalent: {same}")?;
        }
        Command::ExportCnf { input, out: path, parse } => {
            let n = load(&input, &parse.key_prefix)?;
            let mut f = CnfFormula::new();
            let c = encode_circuit(&mut f, &n, None, None)?;
            let mut text = String::new();
            for (label, nets, vars) in [
                ("input", n.primary_inputs(), &c.inputs),
                ("key", n.key_inputs(), &c.keys),
                ("output", n.outputs(), &c.outputs),
            ] {
                for (&net, v) in nets.iter().zip(vars) {
                    writeln!(text, "c {label} {} {}", n.name(net), v.id())?;
                }
            }
            text.push_str(&to_dimacs(&f));
            write_file(&path, &text)?;
            writeln!(out, "variables: {}", f.num_vars())?;
            writeln!(out, "clauses: {}", f.clauses().len())?;
        }
    }
    Ok(out)
}

/// Parses `args` (including the program name) and runs the command.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(cli) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}


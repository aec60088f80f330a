//! `conmod`: render, evaluate, balance, plot, animate, and narrate the
//! built-in concept models.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use conmod::packs::chem::{self, ChemError, ElementTable};
use conmod::registry::{self, BuildContext, ModelRegistry, RegistryError};
use conmod::render::{self, to_svg};
use conmod::{Model, Value};

const REACTION_HELP: &str = "\
Reaction grammar:
  Reaction := Side '->' Side
  Side     := Formula ('+' Formula)*
  Formula  := (Symbol Count?)+      e.g. H2O, FeCl2, C6H12O6
  Symbol   := Upper Lower?
  Count    := Digit+ (at least 1)
Whitespace around '+' and '->' is ignored.";

const EXIT_HELP: &str = "\
Exit codes: 0 ok, 2 unknown model or bad usage, 3 render/narrative/IO failure,
4 evaluation failure, 5 reaction cannot be balanced, 6 parse error or unknown element.";

#[derive(Parser)]
#[command(name = "conmod", version, about = "Executable concept models", after_help = EXIT_HELP)]
struct Cli {
    /// Element masses (`Symbol Mass` per line) merged over the built-in table
    #[arg(long, global = true, value_name = "FILE")]
    elements: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Types,
    Instances,
    Wireframe,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in models
    List,
    /// Write a type, instance, or wireframe diagram as SVG
    Render {
        model: String,
        #[arg(long, value_enum, default_value = "instances")]
        level: Level,
        #[arg(short, long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Call a function on an instance and print `id.fn(args) = result`
    Eval {
        model: String,
        instance: String,
        function: String,
        #[arg(allow_negative_numbers = true)]
        args: Vec<String>,
    },
    /// Balance a reaction, e.g. "H2 + O2 -> H2O"
    #[command(after_help = REACTION_HELP)]
    Balance { reaction: String },
    /// Plot one-argument functions of an instance as SVG
    Plot {
        model: String,
        instance: String,
        /// Defaults to the functions of the model's graph directive
        functions: Vec<String>,
        /// Sample range `a:b`; defaults to the graph directive's range
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        range: Option<(f64, f64)>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(short, long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Write animation frames `frame_0000.svg`, ... into a directory
    Animate {
        model: String,
        instance: String,
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        range: Option<(f64, f64)>,
        #[arg(long, default_value_t = 60)]
        frames: usize,
        #[arg(short, long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Print one sentence per instance
    Narrate { model: String },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected `a:b`, got `{s}`"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{t}` is not a number"))
    };
    let (a, b) = (num(a)?, num(b)?);
    if a >= b {
        return Err(format!("range start {a} must be below end {b}"));
    }
    Ok((a, b))
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl fmt::Display) -> Failure {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

const UNKNOWN_MODEL: u8 = 2;
const RENDER: u8 = 3;
const EVAL: u8 = 4;
const INFEASIBLE: u8 = 5;
const PARSE: u8 = 6;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn element_table(path: Option<&Path>) -> Result<ElementTable, Failure> {
    let builtin = ElementTable::builtin();
    let Some(path) = path else {
        return Ok(builtin);
    };
    let text =
        fs::read_to_string(path).map_err(|e| Failure::new(RENDER, format!("reading {}: {e}", path.display())))?;
    let extra = ElementTable::parse(&text).map_err(|e| Failure::new(PARSE, format!("{}: {e}", path.display())))?;
    Ok(builtin.merged(&extra))
}

fn build(id: &str, ctx: &BuildContext) -> Result<Model, Failure> {
    ModelRegistry::builtin().build(id, ctx).map_err(|e| match e {
        RegistryError::UnknownModel { .. } => Failure::new(UNKNOWN_MODEL, e),
        other => Failure::new(RENDER, other),
    })
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::new(RENDER, format!("writing {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = BuildContext {
        elements: element_table(cli.elements.as_deref())?,
    };
    match cli.command {
        Command::List => {
            for id in ModelRegistry::builtin().ids() {
                println!("{id}");
            }
            Ok(())
        }
        Command::Render { model, level, out } => {
            let m = build(&model, &ctx)?;
            let doc = match level {
                Level::Types => render::type_diagram(&m).map_err(|e| Failure::new(RENDER, e))?,
                Level::Instances => render::instance_diagram(&m).map_err(|e| Failure::new(RENDER, e))?,
                Level::Wireframe => registry::wireframe(&m).map_err(|e| Failure::new(RENDER, e))?,
            };
            write(&out, &to_svg(&doc))
        }
        Command::Eval {
            model,
            instance,
            function,
            args,
        } => {
            let m = build(&model, &ctx)?;
            let args: Vec<Value> = args
                .iter()
                .map(|a| parse_arg(a).ok_or_else(|| Failure::new(EVAL, format!("argument `{a}` is not a number"))))
                .collect::<Result<_, _>>()?;
            let inst = m.require_instance(&instance).map_err(|e| Failure::new(EVAL, e))?;
            let result = m.invoke(inst, &function, &args).map_err(|e| Failure::new(EVAL, e))?;
            let shown: Vec<String> = args.iter().map(Value::to_string).collect();
            println!("{instance}.{function}({}) = {result}", shown.join(", "));
            Ok(())
        }
        Command::Balance { reaction } => {
            let r = chem::parse_reaction(&reaction, &ctx.elements).map_err(|e| parse_failure(&reaction, &e))?;
            let cs = chem::balance(&r.ins, &r.outs).map_err(|e| Failure::new(INFEASIBLE, e))?;
            println!("{}", chem::format_balanced(&r.ins, &r.outs, &cs));
            Ok(())
        }
        Command::Plot {
            model,
            instance,
            functions,
            range,
            samples,
            out,
        } => {
            let m = build(&model, &ctx)?;
            let directive = registry::graph_functions(&m, &instance);
            let functions = if functions.is_empty() {
                directive.as_ref().map(|(f, _)| f.clone()).ok_or_else(|| {
                    Failure::new(
                        EVAL,
                        format!("no functions given and `{instance}` has no graph directive"),
                    )
                })?
            } else {
                functions
            };
            let range = range
                .or(directive.map(|(_, r)| r))
                .ok_or_else(|| Failure::new(EVAL, "no --range given and no graph directive to take it from"))?;
            let spec =
                registry::plot_spec(&m, &instance, &functions, range, samples).map_err(|e| Failure::new(EVAL, e))?;
            let doc = render::plot(&spec).map_err(|e| Failure::new(EVAL, e))?;
            write(&out, &to_svg(&doc))
        }
        Command::Animate {
            model,
            instance,
            range,
            frames,
            out,
        } => {
            let m = build(&model, &ctx)?;
            let spec = registry::animation_spec(&m, &instance, range, frames)
                .ok_or_else(|| Failure::new(EVAL, format!("`{instance}` has no animation directive")))?;
            let docs = render::animate(&m, &spec).map_err(|e| Failure::new(EVAL, e))?;
            fs::create_dir_all(&out).map_err(|e| Failure::new(RENDER, format!("creating {}: {e}", out.display())))?;
            for (k, doc) in docs.iter().enumerate() {
                write(&out.join(format!("frame_{k:04}.svg")), &to_svg(doc))?;
            }
            Ok(())
        }
        Command::Narrate { model } => {
            let m = build(&model, &ctx)?;
            for line in render::narrative_sentences(&m).map_err(|e| Failure::new(RENDER, e))? {
                println!("{line}");
            }
            Ok(())
        }
    }
}

/// Integral text becomes an Int, anything else numeric a Float.
fn parse_arg(s: &str) -> Option<Value> {
    if let Ok(i) = s.parse::<i64>() {
        return Some(Value::Int(i));
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Value::Float)
}

fn parse_failure(input: &str, e: &ChemError) -> Failure {
    let offset = match e {
        ChemError::Syntax { offset, .. } | ChemError::UnknownElement { offset, .. } => Some(*offset),
        _ => None,
    };
    let message = match offset {
        Some(o) => format!(
            "{e}\n  {input}\n  {}^",
            " ".repeat(input[..o.min(input.len())].chars().count())
        ),
        None => e.to_string(),
    };
    Failure::new(PARSE, message)
}

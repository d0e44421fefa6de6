use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use latrefine::analysis::{reproduce_paper, volume_table, ReproduceOptions};
use latrefine::figures::Figure;
use latrefine::lattice::{generate, shell_histogram};
use latrefine::meshio::{to_float_mesh, write_off, write_stl, FloatMesh};
use latrefine::planar::{recurrence_table, GridKind};
use latrefine::voronoi::{representative_cell, ConvexCell};
use latrefine::{BoxR, Rat, RefinementPlan, SiteClass};

#[derive(Parser)]
#[command(name = "latrefine", version, about = "Exact Voronoi cells of refined cubic lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the sites of a plan inside a half-open box.
    Sites {
        #[arg(long)]
        plan: RefinementPlan,
        /// x0,y0,z0,x1,y1,z1
        #[arg(long, default_value = "0,0,0,1,1,1")]
        bbox: BoxR,
    },
    /// Build the Voronoi cell of a class representative.
    Cell {
        #[arg(long)]
        plan: RefinementPlan,
        #[arg(long)]
        class: SiteClass,
        /// Write the cell as a mesh: FMT (off|stl) then PATH (file or directory).
        #[arg(long, num_args = 2, value_names = ["FMT", "PATH"])]
        export: Option<Vec<String>>,
    },
    /// Neighbor shell histogram around a class representative.
    Shells {
        #[arg(long)]
        plan: RefinementPlan,
        #[arg(long)]
        class: SiteClass,
        #[arg(long = "max-r2")]
        max_r2: Rat,
    },
    /// Volume of every class and the partition of the unit cell.
    Volumes {
        #[arg(long)]
        plan: RefinementPlan,
    },
    /// Run every golden check; exit status 1 if any fails.
    Verify {
        /// Monte-Carlo samples per plan (0 skips the Monte-Carlo checks).
        #[arg(long = "mc-samples", default_value_t = 0)]
        mc_samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long = "grid-n", default_value_t = 48)]
        grid_n: u32,
        /// Also write the report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Recurrence of the two-dimensional refinements.
    Planar {
        #[arg(long)]
        kind: Kind,
        #[arg(long, default_value_t = 4)]
        steps: u32,
    },
    /// Write a named multi-cell assembly as a mesh.
    ExportAssembly {
        #[arg(long)]
        plan: RefinementPlan,
        #[arg(long)]
        figure: Figure,
        /// Mesh format; taken from the file extension when omitted.
        #[arg(long)]
        format: Option<Format>,
        path: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Square,
    Triangular,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Off,
    Stl,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Off => "off",
            Format::Stl => "stl",
        }
    }

    fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(Format::Off),
            "stl" => Some(Format::Stl),
            _ => None,
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
    Verification,
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<latrefine::Error> for Failure {
    fn from(e: latrefine::Error) -> Self {
        use latrefine::Error::*;
        match e {
            InvalidPlan(_) | ClassNotInPlan(..) | InvalidBox(_) | InvalidArgument(_) | Parse(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn float(r: &Rat) -> String {
    format!("{:.7}", r.to_f64())
}

fn write_mesh(mesh: &FloatMesh, format: Format, path: &Path) -> Outcome {
    let mut sink = BufWriter::new(File::create(path)?);
    match format {
        Format::Off => write_off(mesh, &mut sink)?,
        Format::Stl => write_stl(mesh, &mut sink)?,
    }
    Ok(())
}

/// A directory target gets the conventional `<plan>_<name>.<ext>` file name.
fn target(path: &Path, plan: &RefinementPlan, name: &str, format: Format) -> PathBuf {
    if path.is_dir() {
        path.join(format!("{}_{name}.{}", plan.slug(), format.ext()))
    } else {
        path.to_path_buf()
    }
}

fn sites(out: &mut impl Write, plan: &RefinementPlan, bbox: &BoxR) -> Outcome {
    for s in generate(plan, bbox) {
        writeln!(out, "{s}")?;
    }
    Ok(())
}

fn print_cell(out: &mut impl Write, plan: &RefinementPlan, cell: &ConvexCell) -> Outcome {
    let volume = cell.volume();
    let fv = cell.face_census();
    writeln!(out, "plan: {plan}")?;
    writeln!(out, "site: {}", cell.generator())?;
    writeln!(out, "volume: {volume} ({})", float(&volume))?;
    writeln!(out, "f-vector: {fv}")?;
    writeln!(out, "edges (squared length, length, count):")?;
    for (r2, n) in cell.cell_metrics().edge_census {
        writeln!(out, "  {r2}\t{:.7}\t{n}", r2.to_f64().sqrt())?;
    }
    writeln!(out, "vertices:")?;
    for v in cell.cell_metrics().vertices {
        writeln!(out, "  {} {} {}", v.x, v.y, v.z)?;
    }
    Ok(())
}

fn cell(out: &mut impl Write, plan: &RefinementPlan, cls: SiteClass, export: Option<&[String]>) -> Outcome {
    let c = representative_cell(cls, plan)?;
    print_cell(out, plan, &c)?;
    if let Some([fmt, path]) = export {
        let format = Format::from_str(fmt, true).map_err(|_| Failure::Usage(format!("unknown mesh format {fmt:?}")))?;
        let path = target(Path::new(path), plan, cls.name(), format);
        write_mesh(&to_float_mesh(&[c]), format, &path)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn shells(out: &mut impl Write, plan: &RefinementPlan, cls: SiteClass, max_r2: &Rat) -> Outcome {
    let h = shell_histogram(cls, plan, max_r2)?;
    writeln!(out, "r2\tcount\tdistance")?;
    for (r2, n) in &h.shells {
        writeln!(out, "{r2}\t{n}\t{:.7}", r2.to_f64().sqrt())?;
    }
    Ok(())
}

fn verify(out: &mut impl Write, opts: ReproduceOptions, report: Option<&Path>) -> Outcome {
    let rep = reproduce_paper(&opts)?;
    write!(out, "{rep}")?;
    if let Some(path) = report {
        std::fs::write(path, rep.to_json() + "\n")?;
    }
    if rep.all_pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn planar(out: &mut impl Write, kind: Kind, steps: u32) -> Outcome {
    let kind = match kind {
        Kind::Square => GridKind::Square,
        Kind::Triangular => GridKind::Triangular,
    };
    writeln!(out, "step\tconst^2\tarea^2\tcos\trotation")?;
    for b in recurrence_table(kind, steps) {
        writeln!(out, "{b}")?;
    }
    Ok(())
}

fn export_assembly(
    out: &mut impl Write,
    plan: &RefinementPlan,
    figure: Figure,
    format: Option<Format>,
    path: &Path,
) -> Outcome {
    let format = format
        .or_else(|| Format::from_path(path))
        .or_else(|| path.is_dir().then_some(Format::Off))
        .ok_or_else(|| Failure::Usage(format!("cannot tell the mesh format of {}", path.display())))?;
    let cells = figure.cells(plan)?;
    let path = target(path, plan, &format!("{figure}_assembly"), format);
    let mesh = to_float_mesh(&cells);
    write_mesh(&mesh, format, &path)?;
    for c in &cells {
        writeln!(out, "{}\t{}", c.generator(), c.volume())?;
    }
    writeln!(out, "wrote {} ({} cells, {} triangles)", path.display(), cells.len(), mesh.triangles.len())?;
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = match cli.command {
        Command::Sites { plan, bbox } => sites(&mut out, &plan, &bbox),
        Command::Cell { plan, class, export } => cell(&mut out, &plan, class, export.as_deref()),
        Command::Shells { plan, class, max_r2 } => shells(&mut out, &plan, class, &max_r2),
        Command::Volumes { plan } => {
            write!(out, "{}", volume_table(&plan)?)?;
            Ok(())
        }
        Command::Verify { mc_samples, seed, grid_n, report } => verify(
            &mut out,
            ReproduceOptions { mc_samples, seed, grid_n, ..ReproduceOptions::default() },
            report.as_deref(),
        ),
        Command::Planar { kind, steps } => planar(&mut out, kind, steps),
        Command::ExportAssembly { plan, figure, format, path } => {
            export_assembly(&mut out, &plan, figure, format, &path)
        }
    };
    out.flush()?;
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

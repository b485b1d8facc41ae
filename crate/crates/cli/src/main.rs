use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use sddmesh_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let result = RunConfig::from_args(cli.command).and_then(|cfg| run(&cfg).map(|s| (cfg, s)));
    match result {
        Ok((cfg, s)) => {
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            let q = &s.quality;
            println!("q_max {} q_mean {}", q.q_max, q.q_mean);
            if let (Some(rm), Some(ra)) = (q.r_max, q.r_mean) {
                println!("r_max {rm} r_mean {ra}");
            }
            if let Some(l) = q.l_inf {
                println!("l_inf {l}");
            }
            if cfg.command != sddmesh_cli::Command::Quality {
                let t = &s.timing;
                println!("t_stoc {:.3} t_sub {:.3} t_smooth {:.3} t_total {:.3}", t.t_stoc, t.t_sub, t.t_smooth, t.t_total);
                if let (Some(t1), Some(sp)) = (t.t_1, t.speedup) {
                    println!("t_1 {t1:.3} speedup_model {sp:.2}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

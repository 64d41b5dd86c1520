use clap::Parser;

use bh_complexity::cli::{run, Args};

fn main() {
    let args = Args::parse();
    match run(&args) {
        Ok(m) => {
            eprintln!("{}: {} point(s) in {:.2}s", m.command, m.points.len(), m.wall_time_s);
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e).expect("error serializes"));
            std::process::exit(e.exit_code());
        }
    }
}

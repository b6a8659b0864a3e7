use clap::Parser;

use qrclab_cli::{parse_cli, run, Cli};

fn main() {
    let cli = Cli::parse();
    let (config, w_or_h_explicit) = match parse_cli(&cli, std::env::var("QRCLAB_SEED").ok()) {
        Ok(resolved) => resolved,
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    };
    if let Err(err) = run(&config, w_or_h_explicit) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
    println!(
        "{} -> {} (+ {})",
        config.experiment.name(),
        config.output_path.display(),
        qrclab_cli::output::sidecar_path(&config.output_path).display()
    );
}

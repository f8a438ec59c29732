use clap::Parser;
use ptlab_cli::{configure_threads, emit, run, Cli};

fn main() {
    let cli = Cli::parse();
    let level = match cli.config.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let code = match configure_threads().and_then(|()| {
        let outcome = run(&cli)?;
        emit(&outcome, &cli.config)?;
        Ok(outcome.exit_code())
    }) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

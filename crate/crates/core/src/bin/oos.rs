use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OOS_LOG", "warn")).init();
    let cli = oos_core::cli::Cli::parse();
    std::process::exit(oos_core::cli::run(cli));
}

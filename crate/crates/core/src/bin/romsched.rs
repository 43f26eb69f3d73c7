use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = rom_sched::cli::Cli::parse();
    rom_sched::cli::dispatch(cli)
}

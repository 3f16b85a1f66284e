use clap::Parser;

use hajos_cycles::cli::{run, CliConfig};

fn main() {
    // behave like a standard pipeline tool: exit quietly when stdout closes
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let config = CliConfig::parse();
    std::process::exit(run(config));
}

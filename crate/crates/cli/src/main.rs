fn main() {
    std::process::exit(phonon_dephasing_cli::cli::run(std::env::args_os()));
}

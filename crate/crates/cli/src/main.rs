fn main() {
    std::process::exit(fouriervol_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(hartogs_bergman_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(dialaug_cli::run(std::env::args_os()));
}

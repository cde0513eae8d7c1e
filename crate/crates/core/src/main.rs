fn main() {
    std::process::exit(rgram::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(shearlift::cli::run(std::env::args_os()));
}

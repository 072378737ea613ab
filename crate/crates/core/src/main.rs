fn main() {
    std::process::exit(zeromult::cli::main_with_args(std::env::args_os()));
}

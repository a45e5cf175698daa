fn main() -> std::process::ExitCode {
    nbvb::cli::main()
}

fn main() -> std::process::ExitCode {
    cone_cert::cli::main()
}

fn main() -> std::process::ExitCode {
    lie2::cli::main_entry()
}

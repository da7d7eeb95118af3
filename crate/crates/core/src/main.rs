fn main() -> std::process::ExitCode {
    sthdg::cli::main_entry()
}

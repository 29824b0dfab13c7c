//! Config-driven scenario runs. A run is evaluated completely in memory,
//! then its files are written atomically together with a manifest of their
//! digests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num::rational::BigRational;
use num::{BigInt, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::{self, series_from_reports, write_aggregate_csv, write_matrix_csv, ScenarioConfig};
use crate::ledger::{degrees_of_freedom, Ledger, NettingMode, Payment};
use crate::money::{parse_decimal, parse_unit_fraction, render_decimal, Money};
use crate::participant::{ParticipantId, ParticipantSet};
use crate::strategem::{
    amend_schedule, anfa_purchase, apply_dilution, ela_gdp_ratio, ela_issue, love_letter_capacity,
    replay_love_letter_timeline, simulate_rollover, AnfaAccount, Council, DilutionEvent,
    ElaPosition, HaircutSchedule, Holding, LoveLetterNetwork, RolloverInputs, TimelineEvent,
};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const STRATEGEMS: [&str; 6] = [
    "rollover",
    "love_letters",
    "ela",
    "anfa",
    "haircut",
    "target",
];
const SCENARIO: &str = "scenario";
const DEFAULT_BASE_DATE: &str = "1999-01-04";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesPoint {
    pub t: u32,
    pub label: String,
    pub value: Money,
}

/// Everything a run produces, before anything touches the disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioOutput {
    pub name: String,
    pub strategem: String,
    pub seed: u64,
    pub series: Vec<SeriesPoint>,
    pub summary: Vec<(String, String)>,
    /// Additional files, keyed by suffix after `<name>.`.
    pub attachments: Vec<(String, String)>,
}

impl ScenarioOutput {
    fn new(name: &str, strategem: &str, seed: u64) -> Self {
        ScenarioOutput {
            name: name.to_string(),
            strategem: strategem.to_string(),
            seed,
            series: Vec::new(),
            summary: vec![("strategem".into(), strategem.into())],
            attachments: Vec::new(),
        }
    }

    fn point(&mut self, t: u32, label: impl Into<String>, value: Money) {
        self.series.push(SeriesPoint {
            t,
            label: label.into(),
            value,
        });
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    /// `t,label,value_cents` series and a `key=value` summary.
    #[default]
    Csv,
    /// Whitespace-aligned tables for reading in a terminal.
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::param(
                "format",
                format!("`{other}` is not csv or text"),
            )),
        }
    }
}

/// Renders the output files of a run. Pure: same output, same bytes.
pub fn emit_report(output: &ScenarioOutput, format: ReportFormat) -> Vec<(String, Vec<u8>)> {
    let name = &output.name;
    // the summary stays key=value in every format so `report` can read it back
    let summary = render_summary(&output.summary, ReportFormat::Csv).into_bytes();
    let mut files = Vec::new();
    match format {
        ReportFormat::Csv => {
            let mut series = String::from("t,label,value_cents\n");
            for p in &output.series {
                let _ = writeln!(series, "{},{},{}", p.t, p.label, p.value);
            }
            files.push((format!("{name}.timeseries.csv"), series.into_bytes()));
            files.push((format!("{name}.summary.txt"), summary.clone()));
        }
        ReportFormat::Text => {
            let label_width = output
                .series
                .iter()
                .map(|p| p.label.len())
                .max()
                .unwrap_or(5)
                .max(5);
            let mut series = format!(
                "{:>6}  {:<label_width$}  {:>24}\n",
                "t", "label", "value_cents"
            );
            for p in &output.series {
                let _ = writeln!(
                    series,
                    "{:>6}  {:<label_width$}  {:>24}",
                    p.t, p.label, p.value
                );
            }
            files.push((format!("{name}.timeseries.txt"), series.into_bytes()));
            files.push((format!("{name}.summary.txt"), summary.clone()));
        }
    }
    for (suffix, content) in &output.attachments {
        files.push((format!("{name}.{suffix}"), content.clone().into_bytes()));
    }
    files
}

pub fn render_summary(summary: &[(String, String)], format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            for (k, v) in summary {
                let _ = writeln!(out, "{k}={v}");
            }
        }
        ReportFormat::Text => {
            let width = summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in summary {
                let _ = writeln!(out, "{k:<width$}  {v}");
            }
        }
    }
    out
}

pub fn parse_summary(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestOutput {
    /// File name relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunManifest {
    pub command: String,
    pub config: String,
    pub config_sha256: String,
    pub seed: u64,
    pub engine_version: String,
    pub outputs: Vec<ManifestOutput>,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command={}", self.command);
        let _ = writeln!(out, "config={}", self.config);
        let _ = writeln!(out, "config_sha256={}", self.config_sha256);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "engine_version={}", self.engine_version);
        for o in &self.outputs {
            let _ = writeln!(out, "output={} sha256={}", o.path, o.sha256);
        }
        out
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        let mut outputs = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let at = |m: &str| Error::parse(format!("{source}:{}", k + 1), m);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at("expected key=value"))?;
            if key == "output" {
                let (path, digest) = value
                    .split_once(" sha256=")
                    .ok_or_else(|| at("expected `output=<file> sha256=<hex>`"))?;
                outputs.push(ManifestOutput {
                    path: path.to_string(),
                    sha256: digest.to_string(),
                });
            } else if fields.insert(key, value).is_some() {
                return Err(at("repeated key"));
            }
        }
        let take = |key: &str| {
            fields
                .get(key)
                .map(|v| v.to_string())
                .ok_or_else(|| Error::parse(source, format!("missing `{key}`")))
        };
        Ok(RunManifest {
            command: take("command")?,
            config: take("config")?,
            config_sha256: take("config_sha256")?,
            seed: take("seed")?
                .parse()
                .map_err(|_| Error::parse(source, "seed is not an integer"))?,
            engine_version: take("engine_version")?,
            outputs,
        })
    }

    /// Re-hashes every output under `dir`.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for o in &self.outputs {
            let path = dir.join(&o.path);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if io::sha256_hex(&bytes) != o.sha256 {
                return Err(Error::DigestMismatch(path));
            }
        }
        Ok(())
    }
}

/// Loads, evaluates and writes a scenario. `strategem`, when given, must
/// agree with the config's own `[scenario] strategem`.
pub fn run_scenario(
    config_path: &Path,
    strategem: Option<&str>,
    out_dir: &Path,
    format: ReportFormat,
) -> Result<RunManifest> {
    let text = io::read_to_string(config_path)?;
    let config = ScenarioConfig::parse(&text, &config_path.display().to_string())?;
    let output = evaluate(&config, strategem)?;
    let files = emit_report(&output, format);
    write_run(
        out_dir,
        &output.name,
        &format!("strategem {}", output.strategem),
        &config_path.display().to_string(),
        text.as_bytes(),
        output.seed,
        files,
    )
}

/// Writes `files` plus a `<name>.manifest.txt` recording their digests, all
/// or nothing.
pub fn write_run(
    out_dir: &Path,
    name: &str,
    command: &str,
    input: &str,
    input_bytes: &[u8],
    seed: u64,
    mut files: Vec<(String, Vec<u8>)>,
) -> Result<RunManifest> {
    let manifest = RunManifest {
        command: command.to_string(),
        config: input.to_string(),
        config_sha256: io::sha256_hex(input_bytes),
        seed,
        engine_version: ENGINE_VERSION.to_string(),
        outputs: files
            .iter()
            .map(|(file, bytes)| ManifestOutput {
                path: file.clone(),
                sha256: io::sha256_hex(bytes),
            })
            .collect(),
    };
    files.push((manifest_name(name), manifest.render().into_bytes()));
    io::write_all_atomically(out_dir, &files)?;
    Ok(manifest)
}

pub fn manifest_name(name: &str) -> String {
    format!("{name}.manifest.txt")
}

pub fn manifest_path(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(manifest_name(name))
}

/// Evaluates a parsed config without touching the disk.
pub fn evaluate(config: &ScenarioConfig, strategem: Option<&str>) -> Result<ScenarioOutput> {
    config.check_keys(SCENARIO, &["name", "strategem", "seed"])?;
    let declared = config.get(SCENARIO, "strategem");
    for name in strategem.iter().chain(declared.iter()) {
        if !STRATEGEMS.contains(name) {
            return Err(Error::UnknownStrategem(name.to_string()));
        }
    }
    let strategem = match (strategem, declared) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::param(
                "strategem",
                format!("command asks for `{a}` but the config declares `{b}`"),
            ))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::param("scenario.strategem", "missing")),
    };
    let name = config.get(SCENARIO, "name").unwrap_or(strategem);
    if name.is_empty()
        || !name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(Error::param(
            "scenario.name",
            "use letters, digits, `_` and `-` only",
        ));
    }
    let seed = match config.get(SCENARIO, "seed") {
        Some(s) => s
            .parse()
            .map_err(|_| Error::param("scenario.seed", format!("`{s}` is not a u64")))?,
        None => 0,
    };
    let mut out = ScenarioOutput::new(name, strategem, seed);
    match strategem {
        "rollover" => rollover(config, &mut out)?,
        "love_letters" => love_letters(config, &mut out)?,
        "ela" => ela(config, &mut out)?,
        "anfa" => anfa(config, &mut out)?,
        "haircut" => haircut(config, &mut out)?,
        "target" => target(config, &mut out)?,
        _ => unreachable!("checked against STRATEGEMS"),
    }
    Ok(out)
}

fn money(section: &str, key: &str, text: &str) -> Result<Money> {
    text.parse().map_err(|_| {
        Error::param(
            format!("{section}.{key}"),
            format!("`{text}` is not an integer number of cents"),
        )
    })
}

fn number<T: std::str::FromStr>(section: &str, key: &str, text: &str) -> Result<T> {
    text.parse().map_err(|_| {
        Error::param(
            format!("{section}.{key}"),
            format!("`{text}` is not a valid number"),
        )
    })
}

fn decimal(section: &str, key: &str, text: &str) -> Result<BigRational> {
    parse_decimal(text).ok_or_else(|| {
        Error::param(
            format!("{section}.{key}"),
            format!("`{text}` is not a decimal"),
        )
    })
}

fn boolean(section: &str, key: &str, text: &str) -> Result<bool> {
    text.parse().map_err(|_| {
        Error::param(
            format!("{section}.{key}"),
            format!("`{text}` is not true or false"),
        )
    })
}

/// One event line: its day and remaining tokens. Days must not decrease.
struct EventLine<'a> {
    day: u32,
    action: &'a str,
    args: Vec<&'a str>,
    text: &'a str,
}

impl EventLine<'_> {
    fn bad(&self, section: &str, reason: impl Into<String>) -> Error {
        Error::param(format!("[{section}] `{}`", self.text), reason)
    }

    fn arity(&self, section: &str, n: usize) -> Result<()> {
        if self.args.len() == n {
            Ok(())
        } else {
            Err(self.bad(section, format!("`{}` takes {n} argument(s)", self.action)))
        }
    }

    fn money(&self, section: &str, k: usize) -> Result<Money> {
        self.args[k].parse().map_err(|_| {
            self.bad(
                section,
                format!("`{}` is not an integer number of cents", self.args[k]),
            )
        })
    }

    fn fraction(&self, section: &str, k: usize) -> Result<BigRational> {
        parse_unit_fraction(section, self.args[k])
    }
}

fn event_lines<'a>(config: &'a ScenarioConfig, section: &str) -> Result<Vec<EventLine<'a>>> {
    let mut events: Vec<EventLine<'a>> = Vec::new();
    for text in config.lines(section) {
        let mut tokens = text.split_whitespace();
        let (Some(day), Some(action)) = (tokens.next(), tokens.next()) else {
            return Err(Error::param(
                format!("[{section}] `{text}`"),
                "expected `<day> <action> …`",
            ));
        };
        let day: u32 = day.parse().map_err(|_| {
            Error::param(
                format!("[{section}] `{text}`"),
                "day is not a non-negative integer",
            )
        })?;
        if let Some(previous) = events.last().map(|e| e.day) {
            if day < previous {
                return Err(Error::EventsOutOfOrder { day, previous });
            }
        }
        events.push(EventLine {
            day,
            action,
            args: tokens.collect(),
            text,
        });
    }
    Ok(events)
}

fn rollover(config: &ScenarioConfig, out: &mut ScenarioOutput) -> Result<()> {
    const S: &str = "rollover";
    config.check_keys(S, &["principal", "rate", "inflation", "horizon"])?;
    let principal = decimal(S, "principal", config.require(S, "principal")?)?
        * BigRational::from_integer(BigInt::from(100));
    if !principal.is_integer() || principal.is_negative() {
        return Err(Error::param(
            "rollover.principal",
            "must be a non-negative amount in whole cents",
        ));
    }
    let initial_principal = Money::from_cents(
        i128::try_from(principal.to_integer())
            .map_err(|_| Error::param("rollover.principal", "out of range"))?,
    );
    let inputs = RolloverInputs {
        initial_principal,
        rate: decimal(S, "rate", config.require(S, "rate")?)?,
        inflation: decimal(S, "inflation", config.get(S, "inflation").unwrap_or("0"))?,
        horizon: number(S, "horizon", config.require(S, "horizon")?)?,
    };
    let path = simulate_rollover(&inputs)?;
    for p in &path.series {
        out.point(p.t, "nominal", p.nominal_cents());
        out.point(p.t, "real", p.real_cents());
    }
    let last = path.series.last().expect("horizon + 1 points");
    out.note("horizon", inputs.horizon);
    out.note("final_nominal", last.nominal_display());
    out.note("final_real", last.real_display());
    out.note("final_nominal_cents", last.nominal_cents());
    out.note("final_real_cents", last.real_cents());
    Ok(())
}

fn love_letters(config: &ScenarioConfig, out: &mut ScenarioOutput) -> Result<()> {
    const S: &str = "love_letters";
    const E: &str = "love_letters.events";
    config.check_keys(S, &["recovery"])?;
    let default_recovery = parse_unit_fraction(
        "love_letters.recovery",
        config.get(S, "recovery").unwrap_or("0"),
    )?;
    let mut schedule = Vec::new();
    for e in event_lines(config, E)? {
        let event = match e.action {
            "borrow" | "repay" => {
                e.arity(E, 2)?;
                let bank = e.args[0].to_string();
                let amount = e.money(E, 1)?;
                if e.action == "borrow" {
                    TimelineEvent::Borrow { bank, amount }
                } else {
                    TimelineEvent::Repay { bank, amount }
                }
            }
            "prohibit" => {
                e.arity(E, 0)?;
                TimelineEvent::Prohibit
            }
            "default" => {
                if !(1..=2).contains(&e.args.len()) {
                    return Err(e.bad(
                        E,
                        "`default` takes a bank (or `*`) and an optional recovery",
                    ));
                }
                let bank = (e.args[0] != "*").then(|| e.args[0].to_string());
                let recovery = if e.args.len() == 2 {
                    e.fraction(E, 1)?
                } else {
                    default_recovery.clone()
                };
                TimelineEvent::Default { bank, recovery }
            }
            other => return Err(e.bad(E, format!("unknown action `{other}`"))),
        };
        schedule.push((e.day, event));
    }
    let outcome = replay_love_letter_timeline(&schedule)?;
    for p in &outcome.series {
        out.point(p.day, "exposure", p.exposure);
    }
    let series: Vec<String> = outcome
        .series
        .iter()
        .map(|p| p.exposure.to_string())
        .collect();
    out.note("exposure_series_cents", series.join(";"));
    out.note("terminal_exposure_cents", outcome.terminal_exposure);
    out.note("loss_cents", outcome.loss);
    out.note("loss", outcome.loss.to_euro_string());
    Ok(())
}

fn ela(config: &ScenarioConfig, out: &mut ScenarioOutput) -> Result<()> {
    const S: &str = "ela";
    const E: &str = "ela.events";
    config.check_keys(
        S,
        &[
            "ncb",
            "outstanding_cents",
            "gdp_cents",
            "members",
            "against",
            "target_coupling",
            "flight_to",
        ],
    )?;
    let ncb = config.require(S, "ncb")?;
    let coupling = boolean(
        S,
        "target_coupling",
        config.get(S, "target_coupling").unwrap_or("false"),
    )?;
    let participants = if coupling {
        let flight_to = config.require(S, "flight_to")?;
        ParticipantSet::new([ncb, flight_to])?
    } else {
        if config.get(S, "flight_to").is_some() {
            return Err(Error::param(
                "ela.flight_to",
                "only meaningful with target_coupling = true",
            ));
        }
        ParticipantSet::new([ncb])?
    };
    let id = ParticipantId(0);
    let mut position = ElaPosition::new(
        id,
        money(
            S,
            "outstanding_cents",
            config.get(S, "outstanding_cents").unwrap_or("0"),
        )?,
        money(S, "gdp_cents", config.require(S, "gdp_cents")?)?,
    )?;
    let mut council = Council::new(
        number(S, "members", config.require(S, "members")?)?,
        number(S, "against", config.get(S, "against").unwrap_or("0"))?,
    )?;
    let mut ledger = coupling.then(|| Ledger::new(2, NettingMode::Cumulative));
    let (mut issued, mut blocked) = (0u32, 0u32);
    let events = event_lines(config, E)?;
    out.point(0, "ela_outstanding", position.outstanding());

    let mut k = 0;
    while k < events.len() {
        let day = events[k].day;
        let mut flows = Vec::new();
        while k < events.len() && events[k].day == day {
            let e = &events[k];
            match e.action {
                "issue" => {
                    e.arity(E, 1)?;
                    let amount = e.money(E, 0)?;
                    let outcome = ela_issue(&position, amount, &council)?;
                    if outcome.is_blocked() {
                        blocked += 1;
                    } else {
                        issued += 1;
                        // the new liquidity leaves for the flight destination
                        flows.push(Payment::new(id, ParticipantId(1), amount, day));
                    }
                    position = outcome.position().clone();
                }
                "council" => {
                    e.arity(E, 2)?;
                    let members = e.args[0]
                        .parse()
                        .map_err(|_| e.bad(E, "members is not an integer"))?;
                    let against = e.args[1]
                        .parse()
                        .map_err(|_| e.bad(E, "against is not an integer"))?;
                    council = Council::new(members, against)?;
                }
                other => return Err(e.bad(E, format!("unknown action `{other}`"))),
            }
            k += 1;
        }
        out.point(day, "ela_outstanding", position.outstanding());
        if let Some(ledger) = ledger.as_mut() {
            let (_, report) = ledger.close_day(day, &flows)?;
            for (label, balance) in participants.labels().iter().zip(&report.balances) {
                out.point(day, format!("target:{label}"), *balance);
            }
        }
    }
    out.note("ncb", ncb);
    out.note("outstanding_cents", position.outstanding());
    out.note("gdp_ratio", render_decimal(&ela_gdp_ratio(&position), 4));
    out.note("issued", issued);
    out.note("blocked", blocked);
    out.note("blocking_threshold", council.blocking_threshold());
    out.note("unblockable_support", council.unblockable_support());
    if let Some(ledger) = &ledger {
        out.note("target_balance_cents", ledger.matrix().row_sum(0));
    }
    Ok(())
}

fn anfa(config: &ScenarioConfig, out: &mut ScenarioOutput) -> Result<()> {
    const S: &str = "anfa";
    const E: &str = "anfa.events";
    config.check_keys(S, &["ncb", "own_assets_cents", "ceiling_cents"])?;
    let ncb = config.require(S, "ncb")?;
    let mut account = AnfaAccount::new(
        ParticipantId(0),
        money(
            S,
            "own_assets_cents",
            config.get(S, "own_assets_cents").unwrap_or("0"),
        )?,
        money(S, "ceiling_cents", config.require(S, "ceiling_cents")?)?,
    )?;
    let mut first_breach = None;
    out.point(0, "own_assets", account.own_assets());
    out.point(0, "headroom", account.headroom());
    for e in event_lines(config, E)? {
        if e.action != "purchase" {
            return Err(e.bad(E, format!("unknown action `{}`", e.action)));
        }
        e.arity(E, 1)?;
        account = anfa_purchase(&account, e.money(E, 0)?)?;
        if account.breached() && first_breach.is_none() {
            first_breach = Some(e.day);
        }
        out.point(e.day, "own_assets", account.own_assets());
        out.point(e.day, "headroom", account.headroom());
    }
    out.note("ncb", ncb);
    out.note("own_assets_cents", account.own_assets());
    out.note("ceiling_cents", account.ceiling());
    out.note("breached", account.breached());
    out.note(
        "first_breach_day",
        first_breach.map_or("none".to_string(), |d| d.to_string()),
    );
    Ok(())
}

fn haircut(config: &ScenarioConfig, out: &mut ScenarioOutput) -> Result<()> {
    const S: &str = "haircut";
    const H: &str = "haircut.holdings";
    const C: &str = "haircut.schedule";
    const E: &str = "haircut.events";
    config.check_keys(S, &["banks", "mode", "prohibit_after"])?;
    let banks: Vec<&str> = config
        .require(S, "banks")?
        .split(',')
        .map(str::trim)
        .collect();
    let tighten = match config.get(S, "mode").unwrap_or("dilution") {
        "dilution" => false,
        "amend" => true,
        other => {
            return Err(Error::param(
                "haircut.mode",
                format!("`{other}` is not dilution or amend"),
            ))
        }
    };
    let mut network = LoveLetterNetwork::new(banks.iter().copied())?;
    if let Some(day) = config.get(S, "prohibit_after") {
        network = network.with_prohibition(number(S, "prohibit_after", day)?);
    }
    for line in config.lines(H) {
        let bad = |reason: &str| Error::param(format!("[{H}] `{line}`"), reason);
        let t: Vec<&str> = line.split_whitespace().collect();
        let [issuer, holder, face, class] = t.as_slice() else {
            return Err(bad("expected `<issuer> <holder> <face_cents> <class>`"));
        };
        let face: Money = face
            .parse()
            .map_err(|_| bad("face is not an integer number of cents"))?;
        network = network.with_holding(Holding::new(issuer, holder, face, class))?;
    }
    let mut schedule = HaircutSchedule::new();
    for line in config.lines(C) {
        let t: Vec<&str> = line.split_whitespace().collect();
        let [class, fraction] = t.as_slice() else {
            return Err(Error::param(
                format!("[{C}] `{line}`"),
                "expected `<class> <haircut>`",
            ));
        };
        schedule = schedule.with_class(class, parse_unit_fraction("haircut", fraction)?)?;
    }

    let record = |out: &mut ScenarioOutput, day: u32, schedule: &HaircutSchedule| {
        let capacity = love_letter_capacity(&network, schedule, day);
        for (bank, cap) in &capacity {
            out.point(day, format!("capacity:{bank}"), *cap);
        }
        let total: Money = capacity.values().sum();
        out.point(day, "capacity_total", total);
        total
    };
    let initial = record(out, 0, &schedule);
    let mut monotone = true;
    let mut previous = initial;
    let events = event_lines(config, E)?;
    for e in &events {
        let event = match e.action {
            "add_class" | "set_haircut" => {
                e.arity(E, 2)?;
                let class = e.args[0].to_string();
                let haircut = e.fraction(E, 1)?;
                if e.action == "add_class" {
                    DilutionEvent::AddClass { class, haircut }
                } else {
                    DilutionEvent::SetHaircut { class, haircut }
                }
            }
            "remove_class" => {
                e.arity(E, 1)?;
                DilutionEvent::RemoveClass {
                    class: e.args[0].to_string(),
                }
            }
            other => return Err(e.bad(E, format!("unknown action `{other}`"))),
        };
        schedule = if tighten {
            amend_schedule(&schedule, &event)?
        } else {
            apply_dilution(&schedule, &event)?
        };
        let total = record(out, e.day, &schedule);
        monotone &= total >= previous;
        previous = total;
    }
    out.note("events", events.len());
    out.note("capacity_before_cents", initial);
    out.note("capacity_after_cents", previous);
    out.note("never_decreased", monotone);
    Ok(())
}

fn target(config: &ScenarioConfig, out: &mut ScenarioOutput) -> Result<()> {
    const S: &str = "target";
    const P: &str = "target.payments";
    config.check_keys(
        S,
        &[
            "participants",
            "mode",
            "base_date",
            "random_days",
            "payments_per_day",
            "max_amount_cents",
        ],
    )?;
    let participants = match config.require(S, "participants")? {
        "eurosystem" => ParticipantSet::eurosystem(false, false),
        "eurosystem+ecb" => ParticipantSet::eurosystem(true, false),
        list => ParticipantSet::new(list.split(',').map(str::trim))?,
    };
    let n = participants.len();
    let mode = match config.get(S, "mode").unwrap_or("cumulative") {
        "cumulative" => NettingMode::Cumulative,
        "per_day" => NettingMode::PerDay,
        other => {
            return Err(Error::param(
                "target.mode",
                format!("`{other}` is not cumulative or per_day"),
            ))
        }
    };
    let base = io::parse_date(config.get(S, "base_date").unwrap_or(DEFAULT_BASE_DATE))?;

    let payments = match config.get(S, "random_days") {
        Some(days) => {
            if !config.lines(P).is_empty() {
                return Err(Error::param(
                    "target.random_days",
                    "give either random settings or [target.payments], not both",
                ));
            }
            if n < 2 {
                return Err(Error::TooFewParticipants { n, min: 2 });
            }
            let days: u32 = number(S, "random_days", days)?;
            let per_day: u32 = number(
                S,
                "payments_per_day",
                config.require(S, "payments_per_day")?,
            )?;
            let max = money(
                S,
                "max_amount_cents",
                config.require(S, "max_amount_cents")?,
            )?;
            if !max.is_positive() {
                return Err(Error::param("target.max_amount_cents", "must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(out.seed);
            let mut payments = Vec::new();
            for day in 0..days {
                for _ in 0..per_day {
                    let payer = rng.gen_range(0..n);
                    let payee = (payer + rng.gen_range(1..n)) % n;
                    let amount = Money::from_cents(rng.gen_range(1..=max.cents()));
                    payments.push(Payment::new(
                        ParticipantId(payer),
                        ParticipantId(payee),
                        amount,
                        day,
                    ));
                }
            }
            payments
        }
        None => {
            let mut payments = Vec::new();
            let mut previous = 0;
            for (k, line) in config.lines(P).iter().enumerate() {
                let bad = |reason: String| Error::param(format!("[{P}] `{line}`"), reason);
                let t: Vec<&str> = line.split_whitespace().collect();
                let [day, payer, payee, amount] = t.as_slice() else {
                    return Err(bad("expected `<day> <payer> <payee> <amount_cents>`".into()));
                };
                let day: u32 = day
                    .parse()
                    .map_err(|_| bad("day is not a non-negative integer".into()))?;
                if k > 0 && day < previous {
                    return Err(Error::EventsOutOfOrder { day, previous });
                }
                previous = day;
                let amount: Money = amount
                    .parse()
                    .map_err(|_| bad("amount is not an integer number of cents".into()))?;
                payments.push(Payment::new(
                    participants.id(payer)?,
                    participants.id(payee)?,
                    amount,
                    day,
                ));
            }
            payments
        }
    };

    let mut ledger = Ledger::new(n, mode);
    let mut reports = Vec::new();
    for chunk in payments.chunk_by(|a, b| a.day == b.day) {
        let (_, report) = ledger.close_day(chunk[0].day, chunk)?;
        for (label, balance) in participants.labels().iter().zip(&report.balances) {
            out.point(report.day, label.clone(), *balance);
        }
        reports.push(report);
    }
    let series = series_from_reports(&participants, &reports, base)?;
    series.check_zero_sum()?;
    out.attachments.push((
        "matrix.csv".into(),
        write_matrix_csv(&participants, ledger.matrix()),
    ));
    out.attachments
        .push(("aggregates.csv".into(), write_aggregate_csv(&series)));
    out.note("participants", n);
    out.note("payments", payments.len());
    out.note("days", reports.len());
    if n >= 2 {
        let dof = degrees_of_freedom(n)?;
        out.note("bilateral_dof", dof.bilateral);
        out.note("aggregate_dof", dof.aggregates);
    }
    out.note("gross_bilateral_cents", ledger.matrix().l1_upper());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> Result<ScenarioOutput> {
        evaluate(&ScenarioConfig::parse(text, "cfg").unwrap(), None)
    }

    #[test]
    fn rollover_two_periods() {
        let out = run("[scenario]\nstrategem = rollover\n[rollover]\nprincipal = 100\nrate = 0.05\ninflation = 0.0\nhorizon = 2\n").unwrap();
        assert_eq!(out.summary_value("final_nominal"), Some("110.25"));
        assert_eq!(out.series.len(), 6);
    }

    #[test]
    fn love_letter_schedule() {
        let out = run("[scenario]\nstrategem = love_letters\n[love_letters.events]\n\
            120 borrow IS 250000000000\n181 borrow IS 200000000000\n212 prohibit\n212 repay IS 100000000000\n280 default * 0\n")
        .unwrap();
        assert_eq!(
            out.summary_value("exposure_series_cents"),
            Some("250000000000;450000000000;350000000000")
        );
        assert_eq!(out.summary_value("loss_cents"), Some("350000000000"));
    }

    #[test]
    fn ela_with_coupling() {
        let out = run("[scenario]\nstrategem = ela\n[ela]\nncb = GR\ngdp_cents = 100\nmembers = 23\nagainst = 15\ntarget_coupling = true\nflight_to = DE\n\
            [ela.events]\n1 issue 71\n2 council 23 16\n3 issue 5\n")
        .unwrap();
        assert_eq!(out.summary_value("gdp_ratio"), Some("0.7100"));
        assert_eq!(out.summary_value("blocked"), Some("1"));
        assert_eq!(out.summary_value("target_balance_cents"), Some("-71"));
    }

    #[test]
    fn anfa_breach_is_reported() {
        let out = run("[scenario]\nstrategem = anfa\n[anfa]\nncb = IE\nceiling_cents = 10\n[anfa.events]\n1 purchase 6\n2 purchase 6\n3 purchase 1\n").unwrap();
        assert_eq!(out.summary_value("first_breach_day"), Some("2"));
        assert_eq!(out.summary_value("breached"), Some("true"));
    }

    #[test]
    fn haircut_dilution_and_tightening() {
        let base = "[scenario]\nstrategem = haircut\n[haircut]\nbanks = A,B\n{mode}\n[haircut.holdings]\nB A 1000 love_letter\nA B 1000 love_letter\n\
            [haircut.schedule]\nlove_letter 0.5\n[haircut.events]\n1 set_haircut love_letter 0.2\n{extra}";
        let out = run(&base.replace("{mode}", "").replace("{extra}", "")).unwrap();
        assert_eq!(out.summary_value("capacity_before_cents"), Some("1000"));
        assert_eq!(out.summary_value("capacity_after_cents"), Some("1600"));
        assert_eq!(out.summary_value("never_decreased"), Some("true"));
        let tightening = base.replace("{extra}", "2 remove_class love_letter\n");
        assert!(run(&tightening.replace("{mode}", "")).is_err());
        let out = run(&tightening.replace("{mode}", "mode = amend")).unwrap();
        assert_eq!(out.summary_value("never_decreased"), Some("false"));
    }

    #[test]
    fn target_random_is_seeded() {
        let cfg = "[scenario]\nstrategem = target\nseed = 7\n[target]\nparticipants = eurosystem\nrandom_days = 3\npayments_per_day = 50\nmax_amount_cents = 1000000\n";
        let a = run(cfg).unwrap();
        assert_eq!(a, run(cfg).unwrap());
        assert_ne!(a, run(&cfg.replace("seed = 7", "seed = 8")).unwrap());
        assert_eq!(a.summary_value("bilateral_dof"), Some("190"));
        let agg = &a.attachments[1].1;
        assert!(io::parse_aggregate_csv(agg, "agg").is_ok());
    }

    #[test]
    fn rejections_before_output() {
        assert!(matches!(
            run("[scenario]\nstrategem = teleport\n"),
            Err(Error::UnknownStrategem(_))
        ));
        assert!(run("[scenario]\nstrategem = rollover\n[rollover]\nprincipal = 100\nrate = -0.1\nhorizon = 2\n").is_err());
        assert!(run("[scenario]\nstrategem = rollover\n[rollover]\nprincipal = 100\nrate = 0.1\nhorizon = 2\ncolour = red\n").is_err());
        assert!(run("[scenario]\nstrategem = anfa\n[anfa]\nncb = IE\nceiling_cents = 1\n[anfa.events]\n2 purchase 1\n1 purchase 1\n").is_err());
        let cfg = ScenarioConfig::parse("[scenario]\nstrategem = rollover\n", "c").unwrap();
        assert!(evaluate(&cfg, Some("ela")).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest {
            command: "strategem rollover".into(),
            config: "a b.ini".into(),
            config_sha256: "00".into(),
            seed: 3,
            engine_version: ENGINE_VERSION.into(),
            outputs: vec![ManifestOutput {
                path: "x.csv".into(),
                sha256: "ff".into(),
            }],
        };
        assert_eq!(RunManifest::parse(&m.render(), "m").unwrap(), m);
    }
}

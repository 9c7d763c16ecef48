//! Deterministic synthetic datasets with the published label counts.
//!
//! Real tweets cannot be redistributed, so every dataset is generated from
//! templates. The COVID-HATE-2022 set also carries the annotated example
//! tweets verbatim, the three "perturbed" username-only tweets, and
//! relevance flags that drive the trim deployment.

use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    concat_datasets, write_dataset, DatasetBundle, DatasetFormat, Label, ScenarioTag, TweetRecord,
};
use crate::error::Result;

pub const COVID_HATE_2022: &str = "covid-hate-2022";
pub const COVID_HATE: &str = "covid-hate";
pub const COVID_HATE_CON: &str = "covid-hate-con";
pub const HATEVAL: &str = "hateval";

/// (name, hate, non-hate) of every shipped dataset.
pub const FIXTURE_COUNTS: [(&str, usize, usize); 4] = [
    (COVID_HATE_2022, 497, 1538),
    (COVID_HATE, 429, 1861),
    (COVID_HATE_CON, 926, 3399),
    (HATEVAL, 7566, 10434),
];

/// Records of COVID-HATE-2022 flagged irrelevant, per class; trimming them
/// leaves 415 hate / 437 non-hate.
pub const TRIM_HATE_REMOVED: usize = 82;
pub const TRIM_NON_HATE_REMOVED: usize = 1101;
/// Non-hate records fetched only because of their author handle.
pub const PERTURBED_RECORDS: usize = 100;

const SEED: u64 = 2022;

use ScenarioTag::*;

const SAMPLE_HATE: &[(&str, ScenarioTag)] = &[
    ("@user @user @user Go away and take COVID with you!!! #chinaliedpeopledied", GoBack),
    ("@user Koreans are literally living rent free of all ch1nk’s head. Get outta twitter", GoBack),
    ("Deserved. No way should these games be taking place in a Pariah State #CCP #chinaliedpeopledied #WinterOlympics", ExplicitSlur),
    ("@user @user @user Dimwit IT coolie.", ExplicitSlur),
    ("LOVED how USA \"subjagated\" PUNK LOSER WHORE #chinaliedpeopledied in ice hockey, shutting them out 8-0", ExplicitSlur),
    ("#chinaliedpeopledied Hold CCP accountable for spreading Wuhan virus and causing global pandemic. No evil deeds shall go unpunished.", BlameChina),
    ("\"Every lie we tell incurs a debt to the truth. Sooner or later that debt is paid\". #CCPChina #chinaliedpeopledied", BlameChina),
    ("I,will never forgive the Chinese for unleashing this virus on us in an act of war. Make no mistake it was an act of war. F**k China. I will never forgive our President and his idiot followers (Dimslee,Newsom et al) for the harm they have done to our seniors and children.", ExplicitOriginClaim),
    ("@user Bc #China owns everything now. They also made the #ChinaVirus", ExplicitOriginClaim),
    ("@user So ridiculous the vaccine does not keep you from getting the wuhan 19 virus or spreading it", ImplicitOriginTerm),
    ("@user Get well soon from #ChineseVirus!", ImplicitOriginTerm),
    ("The #CCP, #Democrat produced #ChinaVirus #Plandemic to remove #PresidentTrump is over. How do you know its over? Time to #Vote thats how, #Yahoo pivots. So @user are in a pants pissing panic over their 100% guaranteed loss of power. #WakeUpAmerica, it’s #VaccineTerrorism", OtherHate),
];

// The 312-character lab-leak quotation is longer than a tweet and is left out.
const SAMPLE_NON_HATE: &[(&str, ScenarioTag)] = &[
    ("People who say the virus comes from China, I think you are really stupid. Where did you hear the virus comes from China? Did you hear that from the marketing number? They will only make rumors. #ChineseVirus", Counterspeech),
    ("@user @user @user @user @user @user Wtf. Whites and blacks called Jeremy lin a ch1nk when he played games in the states. There's racists everywhere in every country.", Counterspeech),
    ("I’m secretly a chinese national and covert operator. i leaked the virus. i am now in taiwan plotting against their president.", ConspiracyOrRumor),
    ("@user Working on a new political intrigue novel. Worldwide environmentalist and leftist in the US, conspire the Chinese communists to create a virus that targets the elderly and obese. They wish to reign in the human population and leave only strong workers …", ConspiracyOrRumor),
    ("\"'Early version of Covid-19' is discovered in Chinese lab, fuelling fears that scientists were studying the virus prior to outbreak\" : (url)", Reference),
    ("@user @user @user Check deeper on what the Sars/Covid virus was and where it came from. Have you heard of chemical warfare? Stuff has to be researched dude. AND AMERICA started the research. Then the Chinese took it over.", Discussion),
    ("Chinese vaccine is showing its impact. Zero cure of Corona. Now perpetrators of Corona virus spread are on Almighty Radar", Discussion),
    ("@user #F**kIsrael been killing my people for 75 yrs. #F**kChina been killing Uyghurs for being Muslims.", PoliticalRumor),
    ("#Meanwhile in #USA & #Canada... #FreedomConvoy #TruckersForFreedom #JustSayNo #Event201 #OutbreakAnatomyofaPlague #CoronaVirus #Deltacron #IHU #Omicron #Florona #Covid19 #Delta #ChinaLiedPeopleDied Bret Baier: This is a big problem for Justin Trudeau", UnrelatedHashtagUse),
    ("Show Americans the kits! Do the American People feel that they've been lied to? #HidenBidenLieden #SouthernBorderCrises #LetsGoBrandon #AfghanistanDeaths #InfationBiden #ChinaVirus #BidenWorstPresidentEver #MassPsychosis #StupidSonofaBitchBiden #TruckConvoy2022 #BidenCrackPipe", UnrelatedHashtagUse),
    ("@user There has to be a chink in the armor of your contract. No way they should keep you if you're not happy.", AlternateMeaning),
    ("@user @user Lol it's not possible IMDb is unbiased site if this could be possible than Radhe, sadak2, coolie no1 would not get such poor rating ... I knew kangu fans don't have brain", AlternateMeaning),
    ("@user My rinky dink home has gone up over 35% in less than 2 years since I got into it. It's insane, and the youngest adults are hosed. Something is going to break, either a pricing crash or a revolution.", AlternateMeaning),
    ("Runs farther routes than slant boy", AlternateMeaning),
    ("@user @user Cleta the Slack-Jawed Yokel", AlternateMeaning),
    ("COVID test available tomorrow at CVS (4100 State Highway 121, Carrollton, TX 75010) at 12:00PM 12:10PM 12:20PM 12:30PM 12:40PM 01:20PM 02:20PM 02:30PM 02:40PM 02:50PM 03:10PM 03:20PM 03:30PM 03:40PM 03:50PM : (url)", OffTopic),
    ("@user City girls up by 1 point", OffTopic),
];

/// Tweets fetched only because the author handle contains a keyword.
const PERTURBED: &[(&str, &str)] = &[
    ("I realize that there is not A Single simple straightforward R tutorial to evaluate the quality and linearity of your proteomic bottom up DIA experimental setup, and this makes me sad. Why such a secrecy? #DIA #massspectrometry #dataanalysis #proteomics", "proteomics_yokel"),
    ("this is very chilling", "ch1nk_of_light"),
    ("The old ladies at the nail salon be so rough shit", "chinkapin_oak"),
];

const HATE_OPENERS: &[&str] = &[
    "#chinaliedpeopledied",
    "#ChinaVirus",
    "#CCPVirus",
    "#MakeChinaPay",
    "#KungFlu",
    "#wuhanvirus",
    "Chinese virus",
    "wuhan virus",
    "#ChinaDidThis",
];

const HATE_CLAIMS: &[&str] = &[
    "go back to your country",
    "take covid with you",
    "hold the CCP accountable",
    "they made this virus in a lab",
    "they unleashed it on the world",
    "never forgive them for the pandemic",
    "the debt will be paid",
    "get out of our country",
];

const NON_HATE_OPENERS: &[&str] = &[
    "covid19",
    "coronavirus",
    "Covid-19",
    "the vaccine",
    "#Omicron",
    "booster clinic",
    "local news",
    "#ChinaVirus trending again",
];

const NON_HATE_CLAIMS: &[&str] = &[
    "calling it that is racist and wrong",
    "stop blaming Asian neighbours",
    "case numbers are down this week",
    "read the study before sharing",
    "testing sites open tomorrow",
    "the origin question is still open",
    "my family finally got boosted",
    "hospitals need more staff",
];

const FILLER: &[&str] = &[
    "today", "again", "honestly", "people", "news", "really", "everyone", "thread", "look", "time",
    "world", "week", "still", "here", "just", "now", "the", "this", "all", "said",
];

const OFF_TOPIC: &[&str] = &[
    "finished my marathon training",
    "coffee shop was packed this morning",
    "new episode drops friday",
    "lost my keys again",
    "the game went to overtime",
    "garden tomatoes are finally ripe",
    "anyone else watching the playoffs",
    "rain all weekend",
];

const PERTURBED_HANDLE_TERMS: &[&str] =
    &["yokel", "ch1nk", "chink", "slant", "coolie", "cina", "dink"];

const HATEVAL_HATE: &[&str] = &[
    "send them all back",
    "they do not belong here",
    "shut the border now",
    "they should keep quiet",
    "nobody wants them here",
];

const HATEVAL_NON_HATE: &[&str] = &[
    "welcome to our new neighbours",
    "refugees deserve safety",
    "equal pay matters",
    "great talk on migration policy",
    "supporting the women's league",
];

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items[rng.gen_range(0..items.len())]
}

fn filler(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..6);
    (0..n)
        .map(|_| pick(rng, FILLER))
        .collect::<Vec<_>>()
        .join(" ")
}

fn timestamp(base: DateTime<Utc>, i: usize) -> DateTime<Utc> {
    base + Duration::minutes(7 * i as i64)
}

fn neutral_handle(prefix: &str, i: usize) -> String {
    format!("{prefix}_user_{i:05}")
}

fn hate_text(rng: &mut ChaCha8Rng) -> (String, ScenarioTag) {
    let opener = pick(rng, HATE_OPENERS);
    let claim = pick(rng, HATE_CLAIMS);
    let tag = [GoBack, BlameChina, ExplicitOriginClaim, ImplicitOriginTerm][rng.gen_range(0..4)];
    (format!("{opener} {claim} {}", filler(rng)), tag)
}

fn non_hate_text(rng: &mut ChaCha8Rng) -> (String, ScenarioTag) {
    if rng.gen_bool(0.3) {
        return (
            format!("{} {}", pick(rng, OFF_TOPIC), filler(rng)),
            OffTopic,
        );
    }
    let tag = [Counterspeech, Discussion, Reference][rng.gen_range(0..3)];
    let text = format!(
        "{} {} {}",
        pick(rng, NON_HATE_OPENERS),
        pick(rng, NON_HATE_CLAIMS),
        filler(rng)
    );
    (text, tag)
}

/// Builds `n_hate + n_non_hate` generated records, prepended by `seeded`
/// verbatim records, then shuffles.
#[allow(clippy::too_many_arguments)]
fn assemble(
    name: &str,
    id_prefix: &str,
    base: DateTime<Utc>,
    seeded: Vec<TweetRecord>,
    n_hate: usize,
    n_non_hate: usize,
    rng: &mut ChaCha8Rng,
    hateval: bool,
) -> Result<DatasetBundle> {
    let have_hate = seeded
        .iter()
        .filter(|r| r.label == Some(Label::Hate))
        .count();
    let have_non = seeded.len() - have_hate;
    let mut records = seeded;
    let plan = std::iter::repeat_n(Label::Hate, n_hate - have_hate)
        .chain(std::iter::repeat_n(Label::NonHate, n_non_hate - have_non));
    for label in plan {
        let (text, tag) = match (hateval, label) {
            (false, Label::Hate) => hate_text(rng),
            (false, Label::NonHate) => non_hate_text(rng),
            (true, Label::Hate) => (
                format!("{} {}", pick(rng, HATEVAL_HATE), filler(rng)),
                OtherHate,
            ),
            (true, Label::NonHate) => (
                format!("{} {}", pick(rng, HATEVAL_NON_HATE), filler(rng)),
                OffTopic,
            ),
        };
        let mut r = TweetRecord::labeled(String::new(), text, label);
        if !hateval {
            r.scenario = Some(tag);
        }
        records.push(r);
    }
    records.shuffle(rng);
    for (i, r) in records.iter_mut().enumerate() {
        r.id = format!("{id_prefix}-{:05}", i + 1);
        r.created_at = timestamp(base, i);
        if r.author_handle.is_empty() {
            r.author_handle = neutral_handle(id_prefix, i + 1);
        }
    }
    DatasetBundle::new(name, records, "synthetic")
}

fn sample_records() -> Vec<TweetRecord> {
    let hate = SAMPLE_HATE.iter().map(|(t, s)| (*t, *s, Label::Hate));
    let non = SAMPLE_NON_HATE
        .iter()
        .map(|(t, s)| (*t, *s, Label::NonHate));
    hate.chain(non)
        .map(|(text, tag, label)| {
            let mut r = TweetRecord::labeled("", text, label).with_scenario(tag);
            r.relevance_flag = Some(true);
            r
        })
        .collect()
}

fn perturbed_records(rng: &mut ChaCha8Rng) -> Vec<TweetRecord> {
    let verbatim = PERTURBED
        .iter()
        .map(|(text, handle)| (text.to_string(), handle.to_string()));
    let generated = (PERTURBED.len()..PERTURBED_RECORDS).map(|i| {
        let term = PERTURBED_HANDLE_TERMS[i % PERTURBED_HANDLE_TERMS.len()];
        let text = format!("{} {}", pick(rng, OFF_TOPIC), filler(rng));
        (text, format!("the_{term}_{i:03}"))
    });
    verbatim
        .chain(generated.collect::<Vec<_>>())
        .map(|(text, handle)| {
            let mut r = TweetRecord::labeled("", text, Label::NonHate)
                .with_handle(handle)
                .with_scenario(OffTopic);
            r.relevance_flag = Some(false);
            r
        })
        .collect()
}

/// COVID-HATE-2022: 497 hate / 1,538 non-hate, with relevance flags.
pub fn covid_hate_2022() -> Result<DatasetBundle> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut seeded = sample_records();
    seeded.extend(perturbed_records(&mut rng));
    let base = Utc.with_ymd_and_hms(2022, 1, 1, 0, 0, 0).unwrap();
    let bundle = assemble(
        COVID_HATE_2022,
        "c22",
        base,
        seeded,
        497,
        1538,
        &mut rng,
        false,
    )?;

    // Flag a fixed number of the remaining records per class as irrelevant.
    let mut records = bundle.into_records();
    let mut candidates: Vec<usize> = (0..records.len())
        .filter(|&i| records[i].relevance_flag.is_none())
        .collect();
    candidates.shuffle(&mut rng);
    let mut quota = [TRIM_NON_HATE_REMOVED - PERTURBED_RECORDS, TRIM_HATE_REMOVED];
    for i in candidates {
        let slot = &mut quota[records[i]
            .label
            .expect("generated records are labeled")
            .index()];
        if *slot > 0 {
            *slot -= 1;
            records[i].relevance_flag = Some(false);
        }
    }
    for r in records.iter_mut().filter(|r| r.relevance_flag.is_none()) {
        r.relevance_flag = Some(true);
    }
    DatasetBundle::new(COVID_HATE_2022, records, "synthetic")
}

/// COVID-HATE: 429 hate / 1,861 non-hate.
pub fn covid_hate() -> Result<DatasetBundle> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let base = Utc.with_ymd_and_hms(2020, 3, 1, 0, 0, 0).unwrap();
    assemble(
        COVID_HATE,
        "ch",
        base,
        Vec::new(),
        429,
        1861,
        &mut rng,
        false,
    )
}

/// COVID-HATE-CON: COVID-HATE-2022 followed by COVID-HATE.
pub fn covid_hate_con() -> Result<DatasetBundle> {
    Ok(concat_datasets(&covid_hate_2022()?, &covid_hate()?).renamed(COVID_HATE_CON))
}

/// HatEval-shaped general hate-speech set: 7,566 hate / 10,434 non-hate.
pub fn hateval() -> Result<DatasetBundle> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let base = Utc.with_ymd_and_hms(2018, 7, 1, 0, 0, 0).unwrap();
    assemble(HATEVAL, "he", base, Vec::new(), 7566, 10434, &mut rng, true)
}

pub fn all_fixtures() -> Result<Vec<DatasetBundle>> {
    Ok(vec![
        covid_hate_2022()?,
        covid_hate()?,
        covid_hate_con()?,
        hateval()?,
    ])
}

/// Writes every fixture as `<dir>/<name>.csv`.
pub fn write_fixtures(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for bundle in all_fixtures()? {
        write_dataset(
            &bundle,
            &dir.join(format!("{}.csv", bundle.name)),
            DatasetFormat::Csv,
        )?;
    }
    Ok(())
}

pub const SEPARABLE_MARKER: &str = "zqxv";

/// `n` records where HATE is exactly the presence of [`SEPARABLE_MARKER`].
pub fn synthetic_separable(n: usize, seed: u64) -> DatasetBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|i| {
            let label = if rng.gen_bool(0.4) {
                Label::Hate
            } else {
                Label::NonHate
            };
            let mut words: Vec<&str> = (0..rng.gen_range(4..10))
                .map(|_| pick(&mut rng, FILLER))
                .collect();
            if label == Label::Hate {
                let at = rng.gen_range(0..=words.len());
                words.insert(at, SEPARABLE_MARKER);
            }
            TweetRecord::labeled(format!("s-{i:05}"), words.join(" "), label)
                .with_handle(neutral_handle("s", i))
        })
        .collect();
    DatasetBundle::new("separable", records, "synthetic").expect("generated records are valid")
}

//! Balanced test-set construction: seeded 50/50 mixing and replica
//! member-id manifests.

use std::collections::HashSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AccountId, CorpusError, Label, LabeledDataset, TestMember, TestSet};

/// Mixes a balanced test set from a genuine dataset and a spambot dataset.
///
/// The larger side is downsampled to the smaller side's size with a
/// seed-determined draw, so the output has `2 * min(|genuine|, |bots|)`
/// members and the same seed always yields the same set. Members are sorted
/// by (class, id).
pub fn build_test_set(
    genuine: &LabeledDataset,
    bots: &LabeledDataset,
    seed: u64,
) -> Result<TestSet, CorpusError> {
    if genuine.account_count() == 0 {
        return Err(CorpusError::EmptyDataset(genuine.name().to_owned()));
    }
    if bots.account_count() == 0 {
        return Err(CorpusError::EmptyDataset(bots.name().to_owned()));
    }
    let n = genuine.account_count().min(bots.account_count());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let negatives = sample_accounts(genuine, n, &mut rng);
    let positives = sample_accounts(bots, n, &mut rng);

    let mut members: Vec<TestMember> = negatives
        .into_iter()
        .map(|account| TestMember { account, is_spambot: false })
        .chain(positives.into_iter().map(|account| TestMember { account, is_spambot: true }))
        .collect();
    members.sort_by(|a, b| {
        a.is_spambot.cmp(&b.is_spambot).then_with(|| a.account.id.cmp(&b.account.id))
    });
    Ok(TestSet { name: format!("{}+{}", genuine.name(), bots.name()), members })
}

fn sample_accounts(dataset: &LabeledDataset, n: usize, rng: &mut ChaCha8Rng) -> Vec<super::Account> {
    if dataset.account_count() == n {
        return dataset.accounts().to_vec();
    }
    let mut chosen: Vec<usize> =
        rand::seq::index::sample(rng, dataset.account_count(), n).into_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|idx| dataset.accounts()[idx].clone()).collect()
}

/// Reads a member-id manifest: one account id per line, `#` comments and
/// blank lines ignored.
pub fn load_manifest(path: &Path) -> Result<Vec<AccountId>, CorpusError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CorpusError::Io { path: path.display().to_string(), source: e })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(AccountId::from)
        .collect())
}

/// Builds a test set from an explicit member-id list, resolving each id
/// against the given source datasets. The member's class comes from its
/// account label; accounts labeled `unknown` are rejected, as are ids that
/// resolve nowhere.
pub fn test_set_from_manifest(
    name: &str,
    sources: &[&LabeledDataset],
    member_ids: &[AccountId],
) -> Result<TestSet, CorpusError> {
    let mut members = Vec::with_capacity(member_ids.len());
    let mut missing = Vec::new();
    let mut seen: HashSet<&AccountId> = HashSet::with_capacity(member_ids.len());
    for id in member_ids {
        if !seen.insert(id) {
            continue;
        }
        let account = sources.iter().find_map(|ds| ds.account(id));
        match account {
            None => missing.push(id.clone()),
            Some(account) => {
                let is_spambot = match account.label {
                    Label::Spambot => true,
                    Label::Genuine => false,
                    Label::Unknown => {
                        return Err(CorpusError::ManifestUnlabeledAccount {
                            manifest: name.to_owned(),
                            id: id.clone(),
                        })
                    }
                };
                members.push(TestMember { account: account.clone(), is_spambot });
            }
        }
    }
    if !missing.is_empty() {
        missing.sort();
        return Err(CorpusError::ManifestUnknownIds { manifest: name.to_owned(), ids: missing });
    }
    members.sort_by(|a, b| {
        a.is_spambot.cmp(&b.is_spambot).then_with(|| a.account.id.cmp(&b.account.id))
    });
    Ok(TestSet { name: name.to_owned(), members })
}

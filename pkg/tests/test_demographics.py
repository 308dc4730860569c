import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from echolens.demographics import (RACE_CATEGORIES, DemographicAnnotation,
                                   Gazetteer, NameModel, NgramNameClassifier,
                                   ProperNounLexicon, annotate_users,
                                   classify_race, continent_of,
                                   default_data_path, demographic_distribution,
                                   eligibility_filter, geolocate_country,
                                   load_gazetteer, load_name_lists,
                                   load_training_names, read_annotations,
                                   write_annotations)

from conftest import make_tweet, make_user


@pytest.fixture(scope="module")
def gaz():
    return load_gazetteer(default_data_path("gazetteer.csv"))


class TestGeolocation:
    def test_coordinates_inside_kenya_box(self, gaz):
        t = make_tweet("t1", lat=-1.29, lon=36.82)
        assert geolocate_country(t, gaz) == "KE"

    def test_place_name_lookup(self, gaz):
        t = make_tweet("t1", place_name="Nairobi")
        assert geolocate_country(t, gaz) == "KE"

    def test_place_lookup_case_insensitive(self, gaz):
        t = make_tweet("t1", place_name="nairobi")
        assert geolocate_country(t, gaz) == "KE"

    def test_unknown_everything_is_none(self, gaz):
        t = make_tweet("t1", place_name="Atlantis")
        assert geolocate_country(t, gaz) is None
        assert geolocate_country(make_tweet("t2"), gaz) is None

    def test_boxes_checked_in_file_order(self):
        g = Gazetteer(boxes=[(-10, -10, 10, 10, "AA"), (-10, -10, 10, 10, "BB")])
        assert g.lookup_coordinates(0.0, 0.0) == "AA"

    def test_coordinates_win_over_place_name(self, gaz):
        t = make_tweet("t1", lat=51.5, lon=-0.12, place_name="Nairobi")
        assert geolocate_country(t, gaz) == "GB"

    def test_continent_lookup(self):
        assert continent_of("KE") == "Africa"
        assert continent_of("br") == "South America"
        assert continent_of(None) is None
        assert continent_of("ZZ") is None


class TestNgramClassifier:
    def test_two_name_posterior_matches_hand_computation(self):
        model = NgramNameClassifier(ngram=3).fit(["kim", "smith"],
                                                 ["asian", "white"])
        # Hand derivation. Grams: "kim" -> ^ki, kim, im$ (3 grams);
        # "smith" -> ^sm, smi, mit, ith, th$ (5 grams). Vocabulary size 8.
        # For "kim" under Asian: each gram seen once, so ((1+1)/(3+8))^3;
        # under White: unseen, ((0+1)/(5+8))^3. Priors are 1/2 each.
        asian_likelihood = (2.0 / 11.0) ** 3
        white_likelihood = (1.0 / 13.0) ** 3
        expected_asian = asian_likelihood / (asian_likelihood + white_likelihood)
        posterior = model.posterior("kim")
        assert abs(posterior["Asian"] - expected_asian) < 1e-9
        assert abs(posterior["White"] - (1.0 - expected_asian)) < 1e-9
        assert posterior["Hispanic"] == 0.0 and posterior["African"] == 0.0

    def test_posteriors_sum_to_one(self):
        names, labels = load_training_names(default_data_path("classifier_names.csv"))
        model = NgramNameClassifier().fit(names, labels)
        for probe in ("tanaka", "garcia", "mwangi", "schneider", "xyz"):
            assert abs(sum(model.posterior(probe).values()) - 1.0) < 1e-9

    @settings(max_examples=50, deadline=None)
    @given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz ", min_size=1, max_size=20))
    def test_posterior_sum_property(self, name):
        names, labels = load_training_names(default_data_path("classifier_names.csv"))
        model = NgramNameClassifier().fit(names, labels)
        posterior = model.posterior(name)
        total = sum(posterior.values())
        assert total == 0.0 or abs(total - 1.0) < 1e-9

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            NgramNameClassifier().fit(["kim"], ["martian"])


@pytest.fixture(scope="module")
def name_model():
    names, labels = load_training_names(default_data_path("classifier_names.csv"))
    return NameModel(
        census_lists=load_name_lists(default_data_path("name_lists.csv")),
        classifier=NgramNameClassifier().fit(names, labels),
        tau=0.6,
    )


class TestClassifyRace:
    def test_latino_list_hit(self, name_model):
        assert classify_race("Emma Garcia", name_model) == "Hispanic"

    def test_black_list_hit(self, name_model):
        assert classify_race("Kofi Okafor", name_model) == "African"

    def test_east_asian_classifier_output_folds_to_asian(self):
        model = NameModel(
            census_lists=[],
            classifier=NgramNameClassifier().fit(
                ["Tanaka", "Suzuki", "Watanabe", "Smith", "Jones", "Brown"],
                ["east_asian", "east_asian", "east_asian",
                 "european", "european", "european"]),
            tau=0.5,
        )
        assert classify_race("Tanaka", model) == "Asian"

    def test_below_threshold_is_inconclusive(self, name_model):
        strict = NameModel(census_lists=name_model.census_lists,
                           classifier=name_model.classifier, tau=0.999999)
        assert classify_race("Quirkyblob Zzyzx", strict) == "Inconclusive"

    def test_empty_name_is_inconclusive(self, name_model):
        assert classify_race("", name_model) == "Inconclusive"
        assert classify_race("12345", name_model) == "Inconclusive"

    def test_list_precedence_beats_classifier(self):
        # Twenty names the classifier would call Asian with high confidence,
        # all also present on the white-voters list: the list must win.
        surnames = [f"{stem}moto" for stem in
                    ("aki", "fuji", "hana", "iwa", "kawa", "kuro", "mats",
                     "miya", "naka", "nishi", "oka", "saka", "shima", "sugi",
                     "taka", "tera", "uchi", "yama", "yoshi", "waka")]
        classifier = NgramNameClassifier().fit(
            surnames + ["smith", "jones", "brown"],
            ["japanese"] * len(surnames) + ["european"] * 3)
        model = NameModel(census_lists=[("White", set(surnames))],
                          classifier=classifier, tau=0.6)
        for surname in surnames:
            posterior = classifier.posterior(surname)
            assert posterior["Asian"] > 0.6  # classifier alone would say Asian
            assert classify_race(surname.title(), model) == "White"

    def test_always_one_of_five_categories(self, name_model):
        for name in ("Emma Garcia", "Tanaka Hiroshi", "zzz", "", "Mwangi",
                     "Lucia Moreno", "Unusualword"):
            assert classify_race(name, name_model) in RACE_CATEGORIES

    def test_list_order_gives_precedence(self):
        lists_a = [("Hispanic", {"cruz"}), ("African", {"cruz"})]
        lists_b = [("African", {"cruz"}), ("Hispanic", {"cruz"})]
        assert NameModel(census_lists=lists_a).list_lookup("Cruz") == "Hispanic"
        assert NameModel(census_lists=lists_b).list_lookup("Cruz") == "African"


@pytest.fixture(scope="module")
def lexicon():
    return ProperNounLexicon.from_files(default_data_path("given_names.csv"),
                                        default_data_path("stopwords.txt"))


class TestEligibility:
    def test_over_25_excluded(self, lexicon):
        user = make_user("u1", display_name="Amina Diallo",
                         has_profile_photo=True, face_count=1, age_estimate=26)
        assert eligibility_filter([user], lexicon) == []

    def test_under_13_excluded(self, lexicon):
        user = make_user("u1", has_profile_photo=True, face_count=1,
                         age_estimate=12)
        assert eligibility_filter([user], lexicon) == []

    def test_no_proper_noun_excluded(self, lexicon):
        user = make_user("u1", display_name="sunflower vibes")
        assert eligibility_filter([user], lexicon) == []
        capped = make_user("u2", display_name="Sunflower Vibes")
        assert eligibility_filter([capped], lexicon) == []

    def test_boundary_age_with_face_included(self, lexicon):
        user = make_user("u1", display_name="Amina Diallo",
                         has_profile_photo=True, face_count=1, age_estimate=25)
        assert eligibility_filter([user], lexicon) == ["u1"]

    def test_unannotated_age_still_eligible(self, lexicon):
        user = make_user("u1", display_name="Amina Diallo")
        assert eligibility_filter([user], lexicon) == ["u1"]

    def test_monotone_under_additions(self, lexicon):
        a = make_user("u1", display_name="Amina Diallo")
        b = make_user("u2", display_name="sunflower vibes")
        assert "u1" in eligibility_filter([a], lexicon)
        assert "u1" in eligibility_filter([a, b], lexicon)


class TestAnnotations:
    def test_photo_rules_gate_age_gender_only(self, gaz, name_model, lexicon):
        users = [make_user("u1", display_name="Amina Diallo",
                           has_profile_photo=False)]
        anns = annotate_users(users, [], gaz, name_model, lexicon)
        ann = anns["u1"]
        assert ann.age is None and ann.gender is None
        assert ann.eligible_youth  # still in race/topic analyses
        assert ann.race in RACE_CATEGORIES

    def test_country_from_majority_of_tweets(self, gaz, name_model, lexicon):
        users = [make_user("u1", display_name="Amina Diallo")]
        tweets = [make_tweet("t1", author_id="u1", place_name="Nairobi"),
                  make_tweet("t2", author_id="u1", place_name="Nairobi"),
                  make_tweet("t3", author_id="u1", place_name="London")]
        ann = annotate_users(users, tweets, gaz, name_model, lexicon)["u1"]
        assert ann.country == "KE"
        assert ann.continent == "Africa"

    def test_round_trip_ndjson(self, tmp_path, gaz, name_model, lexicon):
        users = [make_user("u1", display_name="Amina Diallo",
                           has_profile_photo=True, face_count=1,
                           age_estimate=20, gender_estimate="female")]
        anns = annotate_users(users, [], gaz, name_model, lexicon)
        path = tmp_path / "annotations.ndjson"
        write_annotations(path, anns)
        assert read_annotations(path) == anns


class TestDistribution:
    def make(self, races):
        return [DemographicAnnotation(user_id=f"u{i}", race=r)
                for i, r in enumerate(races)]

    def test_hand_worked_shares(self):
        dist = demographic_distribution(
            self.make(["White", "White", "Asian", "African"]), axis="race")
        assert dist.buckets["White"] == (2, 0.5)
        assert dist.buckets["Asian"] == (1, 0.25)
        assert dist.buckets["African"] == (1, 0.25)

    def test_single_user_full_share(self):
        dist = demographic_distribution(self.make(["Asian"]), axis="race")
        assert dist.buckets == {"Asian": (1, 1.0)}

    def test_all_missing(self):
        anns = [DemographicAnnotation(user_id="u1"), DemographicAnnotation(user_id="u2")]
        dist = demographic_distribution(anns, axis="continent")
        assert dist.buckets == {}
        assert dist.missing == 2

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            demographic_distribution([], axis="race")

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.sampled_from(RACE_CATEGORIES), min_size=1, max_size=40))
    def test_shares_sum_to_one(self, races):
        dist = demographic_distribution(self.make(races), axis="race")
        assert abs(sum(share for _, share in dist.buckets.values()) - 1.0) < 1e-9

import os
import tempfile
from dataclasses import asdict

import pandas as pd
import streamlit as st

from dataset_io import CsvSchema, load_csv, write_labels
from hca_errors import HcaError
from hca_settings import POLICIES, load_settings
from run_hca import ALGORITHMS, run_algorithm


def save_uploaded_file(uploaded_file, temp_dir):
    """Save uploaded file to temporary directory and return its path."""
    file_path = os.path.join(temp_dir, uploaded_file.name)
    with open(file_path, "wb") as f:
        f.write(uploaded_file.getbuffer())
    return file_path


def cluster_size_table(labeling) -> pd.DataFrame:
    """One row per cluster id with its point count; noise appears as cluster -1."""
    sizes = pd.Series(labeling.labels).value_counts().sort_index()
    return pd.DataFrame({"cluster": sizes.index.astype(int), "points": sizes.to_numpy(dtype=int)})


def run_clustering_job(csv_path, epsilon, algorithm="hca", policy=None, minpts=None, has_header=None,
                       delimiter=",", settings=None, temp_dir=None):
    """
    Cluster an uploaded CSV and prepare everything the page shows.

    Args:
        csv_path (str): saved upload
        epsilon (float): density radius
        algorithm (str): hca, dbscan or components
        policy (str, optional): hca merge policy
        minpts (int, optional): dbscan MINPTS
        has_header (bool, optional): whether the CSV has a header row; None detects it
        delimiter (str): CSV delimiter
        settings (Settings, optional): defaults; loaded from the env file when omitted
        temp_dir (str, optional): where the labels CSV is written

    Returns:
        dict: report (dict of RunReport fields), sizes (DataFrame), labels_csv (str)
    """
    settings = settings or load_settings()
    dataset = load_csv(csv_path, CsvSchema(has_header=has_header, delimiter=delimiter))
    labeling, report = run_algorithm(algorithm, dataset, epsilon, settings, minpts=minpts, policy=policy)

    temp_dir = temp_dir or os.path.dirname(os.path.abspath(csv_path))
    labels_path = os.path.join(temp_dir, "labels.csv")
    write_labels(labeling, labels_path)
    with open(labels_path, "r", encoding="utf-8") as f:
        labels_csv = f.read()

    return {
        "report": asdict(report),
        "sizes": cluster_size_table(labeling),
        "labels_csv": labels_csv,
    }


def main():
    st.title("HCA-DBSCAN Clustering")
    st.write("Upload a numeric CSV (one point per row) to cluster it")

    try:
        settings = load_settings()
    except HcaError as e:
        st.error(f"Error loading settings: {e}")
        st.stop()

    with tempfile.TemporaryDirectory() as temp_dir:
        data_file = st.file_uploader("Upload dataset (CSV)", type=["csv"])
        header_choices = {"Detect": None, "Yes": True, "No": False}
        current = next(label for label, value in header_choices.items() if value is settings.csv_has_header)
        header_label = st.selectbox("First row is a header", list(header_choices),
                                    index=list(header_choices).index(current))
        has_header = header_choices[header_label]

        col1, col2 = st.columns(2)
        with col1:
            epsilon = st.number_input("Epsilon", min_value=0.0, value=1.0, format="%.6f")
            algorithm = st.selectbox("Algorithm", ALGORITHMS)
        with col2:
            policy = st.selectbox("Merge policy (hca)", POLICIES, index=POLICIES.index(settings.policy))
            minpts = st.number_input("MINPTS (dbscan)", min_value=1, value=settings.minpts, step=1)

        if data_file and st.button("Run clustering"):
            csv_path = save_uploaded_file(data_file, temp_dir)
            with st.spinner("Clustering..."):
                try:
                    result = run_clustering_job(csv_path, epsilon, algorithm, policy=policy, minpts=int(minpts),
                                                has_header=has_header, delimiter=settings.csv_delimiter,
                                                settings=settings, temp_dir=temp_dir)
                except HcaError as e:
                    st.error(f"An error occurred: {e}")
                    return

            report = result["report"]
            st.success(f"Found {report['cluster_count']} clusters and {report['noise_count']} noise points "
                       f"in {report['wall_time_ms']:.1f} ms")
            st.markdown("### Run Report")
            st.json(report)
            st.markdown("### Cluster Sizes")
            st.dataframe(result["sizes"])

            st.download_button(
                label="Download Labels",
                data=result["labels_csv"],
                file_name=f"{os.path.splitext(data_file.name)[0]}_labels.csv",
                mime="text/csv",
            )


if __name__ == "__main__":
    main()
